//! Activity-recognition data: the UCI daily-and-sports tree
//! (`aXX/pY/sZZ.txt`, 45 comma-separated readings per row) or a seeded
//! synthetic stand-in with the same shape.

use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};

use super::OrchestratorError;
use crate::fl::{ClientDataset, NUM_CLASSES, NUM_FEATURES};

#[derive(Clone, Debug, PartialEq)]
pub enum DatasetSource {
    Uci(PathBuf),
    Synthetic { samples: usize },
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Dataset {
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    fn select(&self, idx: &[usize]) -> Dataset {
        Dataset {
            features: idx.iter().map(|&i| self.features[i].clone()).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
        }
    }
}

/// Cluster spread of the synthetic task: class centres are drawn from
/// `N(0, SYNTH_CENTER_SD²)` per feature, samples add unit noise.
pub const SYNTH_CENTER_SD: f64 = 1.0;

/// Rows in file order (activity, subject, segment, line), optionally
/// subsampled uniformly without replacement.
pub fn load_dataset(
    source: &DatasetSource,
    max_samples: Option<usize>,
    seed: u64,
) -> Result<Dataset, OrchestratorError> {
    let data = match source {
        DatasetSource::Uci(dir) => load_uci(dir)?,
        DatasetSource::Synthetic { samples } => synthetic(*samples, seed),
    };
    Ok(match max_samples {
        Some(n) if n < data.len() => {
            let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0x5eed);
            let mut idx: Vec<usize> = (0..data.len()).collect();
            let (chosen, _) = idx.partial_shuffle(&mut rng, n);
            let mut chosen = chosen.to_vec();
            chosen.sort_unstable();
            data.select(&chosen)
        }
        _ => data,
    })
}

fn sorted_entries(dir: &Path, prefix: char) -> Result<Vec<(String, PathBuf)>, OrchestratorError> {
    let read = fs::read_dir(dir).map_err(|e| OrchestratorError::io(dir, e))?;
    let mut out = Vec::new();
    for entry in read {
        let entry = entry.map_err(|e| OrchestratorError::io(dir, e))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if name.starts_with(prefix) {
            out.push((name, entry.path()));
        }
    }
    out.sort();
    Ok(out)
}

fn load_uci(root: &Path) -> Result<Dataset, OrchestratorError> {
    let activities = sorted_entries(root, 'a')?;
    if activities.is_empty() {
        return Err(OrchestratorError::Dataset(format!("{}: no aXX activity directories", root.display())));
    }
    let mut data = Dataset::default();
    for (name, dir) in activities {
        let label = name[1..]
            .parse::<usize>()
            .ok()
            .and_then(|n| n.checked_sub(1))
            .filter(|&l| l < NUM_CLASSES)
            .ok_or_else(|| OrchestratorError::Dataset(format!("{}: not an activity a01..a19", dir.display())))?;
        for (_, subject) in sorted_entries(&dir, 'p')? {
            for (_, file) in sorted_entries(&subject, 's')? {
                parse_segment(&file, label, &mut data)?;
            }
        }
    }
    Ok(data)
}

fn parse_segment(path: &Path, label: usize, out: &mut Dataset) -> Result<(), OrchestratorError> {
    let text = fs::read_to_string(path).map_err(|e| OrchestratorError::io(path, e))?;
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |reason: String| OrchestratorError::Parse { path: path.to_path_buf(), line: i + 1, reason };
        let row = line
            .split(',')
            .map(|f| f.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| parse_err(format!("non-numeric field: {e}")))?;
        if row.len() != NUM_FEATURES {
            return Err(parse_err(format!("expected {NUM_FEATURES} fields, found {}", row.len())));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(parse_err("non-finite value".into()));
        }
        out.features.push(row);
        out.labels.push(label);
    }
    Ok(())
}

/// Nineteen Gaussian classes in 45 dimensions, balanced round-robin.
pub fn synthetic(samples: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let centre = Normal::new(0.0, SYNTH_CENTER_SD).expect("positive sd");
    let centres: Vec<Vec<f64>> =
        (0..NUM_CLASSES).map(|_| (0..NUM_FEATURES).map(|_| centre.sample(&mut rng)).collect()).collect();
    let noise = Normal::new(0.0, 1.0).expect("unit sd");
    let mut data = Dataset::default();
    for i in 0..samples {
        let label = i % NUM_CLASSES;
        data.features.push(centres[label].iter().map(|c| c + noise.sample(&mut rng)).collect());
        data.labels.push(label);
    }
    data
}

/// Per-feature mean and standard deviation (constant features get sd 1).
fn moments(rows: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let n = rows.len().max(1) as f64;
    let width = rows.first().map_or(0, Vec::len);
    let mean: Vec<f64> = (0..width).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n).collect();
    let sd = (0..width)
        .map(|j| {
            let var = rows.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / n;
            if var > 0.0 { var.sqrt() } else { 1.0 }
        })
        .collect();
    (mean, sd)
}

fn standardize(rows: &mut [Vec<f64>], mean: &[f64], sd: &[f64]) {
    for r in rows {
        for ((v, m), s) in r.iter_mut().zip(mean).zip(sd) {
            *v = (*v - m) / s;
        }
    }
}

/// Shuffled `1 − holdout` / `holdout` split; the training rows are cut into
/// `k` equal contiguous segments (the remainder is dropped). Features are
/// standardized with training-split statistics.
pub fn partition(
    data: &Dataset,
    k: usize,
    holdout: f64,
    seed: u64,
) -> Result<(Vec<ClientDataset>, Dataset), OrchestratorError> {
    if k == 0 {
        return Err(OrchestratorError::Config("need at least one client".into()));
    }
    if !(0.0..1.0).contains(&holdout) {
        return Err(OrchestratorError::Config(format!("holdout fraction {holdout} not in [0, 1)")));
    }
    let mut idx: Vec<usize> = (0..data.len()).collect();
    idx.shuffle(&mut ChaCha20Rng::seed_from_u64(seed));
    let n_test = (data.len() as f64 * holdout).round() as usize;
    let (test_idx, train_idx) = idx.split_at(n_test);
    let per_client = train_idx.len() / k;
    if per_client == 0 {
        return Err(OrchestratorError::Config(format!(
            "{} training rows cannot feed {k} clients",
            train_idx.len()
        )));
    }
    let mut train = data.select(train_idx);
    let mut test = data.select(test_idx);
    let (mean, sd) = moments(&train.features);
    standardize(&mut train.features, &mean, &sd);
    standardize(&mut test.features, &mean, &sd);

    let clients = (0..k)
        .map(|c| {
            let range = c * per_client..(c + 1) * per_client;
            ClientDataset::new(c, train.features[range.clone()].to_vec(), train.labels[range].to_vec())
                .expect("equal lengths")
        })
        .collect();
    Ok((clients, test))
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;
    use std::io::Write;

    use super::*;

    fn write_tree(root: &Path, acts: usize, subjects: usize, segs: usize, rows: usize) {
        for a in 1..=acts {
            for p in 1..=subjects {
                let dir = root.join(format!("a{a:02}")).join(format!("p{p}"));
                fs::create_dir_all(&dir).unwrap();
                for s in 1..=segs {
                    let mut f = fs::File::create(dir.join(format!("s{s:02}.txt"))).unwrap();
                    for r in 0..rows {
                        let vals: Vec<String> =
                            (0..45).map(|j| format!("{}", (a * 1000 + r * 45 + j) as f64 * 0.01)).collect();
                        writeln!(f, "{}", vals.join(",")).unwrap();
                    }
                }
            }
        }
    }

    #[test]
    fn synthetic_shape() {
        let d = load_dataset(&DatasetSource::Synthetic { samples: 1000 }, None, 3).unwrap();
        assert_eq!(d.len(), 1000);
        assert!(d.labels.iter().all(|&l| l < 19));
        assert!(d.features.iter().all(|r| r.len() == 45));
        assert_eq!(d, load_dataset(&DatasetSource::Synthetic { samples: 1000 }, None, 3).unwrap());
        let sub = load_dataset(&DatasetSource::Synthetic { samples: 1000 }, Some(100), 3).unwrap();
        assert_eq!(sub.len(), 100);
    }

    #[test]
    fn uci_tree_row_count_and_labels() {
        let dir = tempfile::tempdir().unwrap();
        write_tree(dir.path(), 3, 2, 4, 5);
        let d = load_dataset(&DatasetSource::Uci(dir.path().into()), None, 0).unwrap();
        // activities × subjects × segments × rows
        assert_eq!(d.len(), 3 * 2 * 4 * 5);
        let counts = d.labels.iter().fold(HashMap::new(), |mut m, l| {
            *m.entry(*l).or_insert(0) += 1;
            m
        });
        assert_eq!(counts, HashMap::from([(0, 40), (1, 40), (2, 40)]));
        assert_eq!(d.features[0][1], 10.01);
    }

    #[test]
    fn malformed_row_cites_line() {
        let dir = tempfile::tempdir().unwrap();
        write_tree(dir.path(), 1, 1, 1, 10);
        let file = dir.path().join("a01/p1/s01.txt");
        let text = fs::read_to_string(&file).unwrap();
        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        lines[6] = lines[6].rsplit_once(',').unwrap().0.to_string();
        fs::write(&file, lines.join("\n")).unwrap();
        let err = load_dataset(&DatasetSource::Uci(dir.path().into()), None, 0).unwrap_err();
        match err {
            OrchestratorError::Parse { line, reason, .. } => {
                assert_eq!(line, 7);
                assert!(reason.contains("44"), "{reason}");
            }
            other => panic!("unexpected {other:?}"),
        }
        lines[6] = format!("{},x", lines[6]);
        fs::write(&file, lines.join("\n")).unwrap();
        assert!(matches!(
            load_dataset(&DatasetSource::Uci(dir.path().into()), None, 0),
            Err(OrchestratorError::Parse { line: 7, .. })
        ));
    }

    #[test]
    fn partition_is_equal_and_complete() {
        let d = synthetic(1003, 4);
        let (clients, test) = partition(&d, 7, 0.2, 5).unwrap();
        let sizes: Vec<usize> = clients.iter().map(ClientDataset::len).collect();
        assert!(sizes.iter().all(|&s| s == sizes[0]));
        assert_eq!(test.len(), 201);
        let train_rows = d.len() - test.len();
        assert_eq!(sizes[0], train_rows / 7);

        // multiset check on labels: segments + dropped + test = everything
        let mut all: Vec<usize> = clients.iter().flat_map(|c| c.labels.clone()).collect();
        all.extend(&test.labels);
        let mut idx: Vec<usize> = (0..d.len()).collect();
        idx.shuffle(&mut ChaCha20Rng::seed_from_u64(5));
        let dropped = &idx[test.len() + 7 * sizes[0]..];
        all.extend(dropped.iter().map(|&i| d.labels[i]));
        all.sort_unstable();
        let mut expected = d.labels.clone();
        expected.sort_unstable();
        assert_eq!(all, expected);

        let (one, _) = partition(&d, 1, 0.2, 5).unwrap();
        assert_eq!(one[0].len(), train_rows);
        assert!(partition(&synthetic(3, 1), 5, 0.2, 1).is_err());
        assert_eq!(partition(&d, 7, 0.2, 5).unwrap().0, clients);
    }

    #[test]
    fn standardized_with_training_moments() {
        let d = synthetic(2000, 6);
        let (clients, _) = partition(&d, 1, 0.2, 7).unwrap();
        let (mean, sd) = moments(&clients[0].features);
        assert!(mean.iter().all(|m| m.abs() < 1e-9));
        assert!(sd.iter().all(|s| (s - 1.0).abs() < 1e-9));
    }
}
