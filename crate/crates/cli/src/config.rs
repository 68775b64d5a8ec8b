//! `key=value` config files and the flag > file > default merge.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};

pub const KEYS: &[&str] = &[
    "clients",
    "fraction",
    "model",
    "epochs",
    "batch",
    "lr",
    "seed",
    "dataset_dir",
    "synthetic",
    "max_samples",
    "out",
    "prove",
];

/// Normalizes `max-samples` to `max_samples`.
fn key(k: &str) -> String {
    k.trim().replace('-', "_")
}

/// Blank lines and `#` comments are ignored; anything else must be
/// `key=value` with a known key.
pub fn parse(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            bail!("line {}: expected key=value, got `{line}`", i + 1);
        };
        let k = key(k);
        if !KEYS.contains(&k.as_str()) {
            bail!("line {}: unknown key `{k}`", i + 1);
        }
        out.insert(k, v.trim().to_string());
    }
    Ok(out)
}

/// Merged settings. Later layers win.
#[derive(Debug, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn from_file(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let values = parse(&text).with_context(|| format!("in {}", path.display()))?;
        Ok(Self { values })
    }

    /// Overrides with a flag value when one was given.
    pub fn set(&mut self, k: &str, v: Option<impl ToString>) {
        if let Some(v) = v {
            self.values.insert(key(k), v.to_string());
        }
    }

    pub fn raw(&self, k: &str) -> Option<&str> {
        self.values.get(k).map(String::as_str)
    }

    pub fn get<T>(&self, k: &str, default: T) -> Result<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        match self.raw(k) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|e| anyhow::anyhow!("`{k}` = `{v}`: {e}")),
        }
    }

    pub fn opt<T>(&self, k: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.raw(k).map(|v| v.parse().map_err(|e| anyhow::anyhow!("`{k}` = `{v}`: {e}"))).transpose()
    }

    /// Comma-separated list.
    pub fn list<T>(&self, k: &str, default: Vec<T>) -> Result<Vec<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        match self.raw(k) {
            None => Ok(default),
            Some(v) => v
                .split(',')
                .map(|x| x.trim().parse().map_err(|e| anyhow::anyhow!("`{k}` item `{x}`: {e}")))
                .collect(),
        }
    }
}
