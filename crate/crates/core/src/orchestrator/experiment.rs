//! Grid sweeps: one fresh protocol instance and one round per configuration,
//! written as CSV rows.

use std::fmt;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::{Serialize, Serializer};

use super::{Dataset, OrchestratorError, Protocol, ProveMode, RoundConfig, RoundRecord};
use crate::fl::{ModelId, TrainConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verified {
    Yes,
    No,
    Skipped,
}

impl fmt::Display for Verified {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Yes => "true",
            Self::No => "false",
            Self::Skipped => "skipped",
        })
    }
}

impl Serialize for Verified {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Column order is the CSV header.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentRow {
    pub model: String,
    pub clients: usize,
    pub batch: usize,
    pub epochs: usize,
    pub accuracy: f64,
    pub constraints: usize,
    pub prove_ms: Option<u64>,
    /// Deploys plus calls.
    pub gas_zkdfl: u64,
    /// Deploy plus every client's full-vector write.
    pub gas_baseline: u64,
    pub verified: Verified,
}

impl ExperimentRow {
    pub fn from_record(rec: &RoundRecord, batch: usize, epochs: usize) -> Self {
        Self {
            model: rec.arch.to_string(),
            clients: rec.selected.len(),
            batch,
            epochs,
            accuracy: rec.accuracy,
            constraints: rec.constraints,
            prove_ms: rec.prove_ms.map(|ms| ms as u64),
            gas_zkdfl: rec.gas.total(),
            gas_baseline: rec.baseline.call_gas + rec.baseline.deploy_gas,
            verified: match rec.proof_ok {
                None => Verified::Skipped,
                Some(true) if rec.all_verified() => Verified::Yes,
                Some(_) => Verified::No,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentGrid {
    pub models: Vec<ModelId>,
    /// Client counts; every client participates.
    pub clients: Vec<usize>,
    pub batches: Vec<usize>,
    pub epochs: Vec<usize>,
    pub lr: f64,
    pub seed: u64,
    pub mode: ProveMode,
}

impl ExperimentGrid {
    pub fn len(&self) -> usize {
        self.models.len() * self.clients.len() * self.batches.len() * self.epochs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn points(&self) -> impl Iterator<Item = (ModelId, usize, usize, usize)> + '_ {
        self.models.iter().flat_map(move |&model| {
            self.clients.iter().flat_map(move |&k| {
                self.batches
                    .iter()
                    .flat_map(move |&b| self.epochs.iter().map(move |&e| (model, k, b, e)))
            })
        })
    }
}

/// Runs every grid point and writes `out` as it goes, so a long sweep that
/// dies part-way still leaves the finished rows on disk.
pub fn run_experiment(
    grid: &ExperimentGrid,
    data: &Dataset,
    out: &Path,
) -> Result<Vec<ExperimentRow>, OrchestratorError> {
    if grid.is_empty() {
        return Err(OrchestratorError::Config("empty experiment grid".into()));
    }
    let file = File::create(out).map_err(|e| OrchestratorError::io(out, e))?;
    let mut w = csv::Writer::from_writer(file);
    let mut rows = Vec::with_capacity(grid.len());
    for (model, k, batch, epochs) in grid.points() {
        let mut cfg = RoundConfig::new(model, k);
        cfg.train = TrainConfig { epochs, batch, lr: grid.lr, seed: 0 };
        cfg.seed = grid.seed;
        let rec = Protocol::new(cfg, data)?.run_round(grid.mode)?;
        let row = ExperimentRow::from_record(&rec, batch, epochs);
        w.serialize(&row)?;
        w.flush().map_err(|e| OrchestratorError::io(out, e))?;
        rows.push(row);
    }
    Ok(rows)
}

/// Writes rows with a header line.
pub fn write_csv(out: &Path, rows: &[ExperimentRow]) -> Result<(), OrchestratorError> {
    let file = File::create(out).map_err(|e| OrchestratorError::io(out, e))?;
    let mut w = csv::Writer::from_writer(file);
    if rows.is_empty() {
        w.write_record(HEADER)?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    let mut inner = w.into_inner().map_err(|e| OrchestratorError::io(out, e.into_error()))?;
    inner.flush().map_err(|e| OrchestratorError::io(out, e))
}

const HEADER: [&str; 10] = [
    "model",
    "clients",
    "batch",
    "epochs",
    "accuracy",
    "constraints",
    "prove_ms",
    "gas_zkdfl",
    "gas_baseline",
    "verified",
];

/// Test accuracy of the global model after each of `rounds` rounds.
pub fn accuracy_curve(
    cfg: RoundConfig,
    data: &Dataset,
    rounds: usize,
    mode: ProveMode,
) -> Result<Vec<f64>, OrchestratorError> {
    let mut proto = Protocol::new(cfg, data)?;
    (0..rounds).map(|_| Ok(proto.run_round(mode)?.accuracy)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orchestrator::synthetic;

    #[test]
    fn grid_of_one_gives_header_and_row() {
        let grid = ExperimentGrid {
            models: vec![ModelId::Model1],
            clients: vec![2],
            batches: vec![10],
            epochs: vec![1],
            lr: 0.05,
            seed: 1,
            mode: ProveMode::Skip,
        };
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("m.csv");
        let rows = run_experiment(&grid, &synthetic(200, 1), &out).unwrap();
        assert_eq!(rows.len(), 1);
        let text = std::fs::read_to_string(&out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], HEADER.join(","));
        assert!(lines[1].starts_with("model1,2,10,1,"));
        assert!(lines[1].ends_with(",skipped"));
        // skipped proving leaves prove_ms empty
        assert_eq!(lines[1].split(',').nth(6), Some(""));
    }

    #[test]
    fn write_csv_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("e.csv");
        write_csv(&out, &[]).unwrap();
        assert_eq!(std::fs::read_to_string(&out).unwrap().trim(), HEADER.join(","));
    }

    #[test]
    fn unwritable_path_is_reported() {
        let grid = ExperimentGrid {
            models: vec![ModelId::Model1],
            clients: vec![1],
            batches: vec![1],
            epochs: vec![1],
            lr: 0.1,
            seed: 0,
            mode: ProveMode::Skip,
        };
        let err = run_experiment(&grid, &synthetic(50, 0), Path::new("/nonexistent/dir/x.csv")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/dir/x.csv"));
    }
}
