//! Learning substrate: MLPs, local SGD, FedAvg, and the fixed-point codec
//! used at the aggregation boundary.

mod codec;
mod mlp;
mod train;

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

pub use codec::{decode_weights, encode_weights, FixedPointCodec};
pub use mlp::{param_count, MlpModel};
pub use train::{client_update, ClientDataset, TrainConfig};

pub const NUM_FEATURES: usize = 45;
pub const NUM_CLASSES: usize = 19;

/// Flattened parameters: layer 1 weights (row-major, `[out][in]`), layer 1
/// biases, layer 2 weights, ...
pub type FlatWeights = Vec<f64>;

#[derive(Debug, Error, PartialEq)]
pub enum FlError {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("expected length {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("weight {index} = {value} is outside the codec range")]
    Range { index: usize, value: f64 },
    #[error("encoded value {value} at {index} is below the codec offset range")]
    Decode { index: usize, value: u64 },
    #[error("label {label} of row {row} is out of range")]
    BadLabel { row: usize, label: usize },
    #[error("row {row} has a non-finite feature")]
    NonFinite { row: usize },
    #[error("invalid argument: {0}")]
    Invalid(String),
}

/// The five architectures of the evaluation; input 45, output 19.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelId {
    Model1,
    Model2,
    Model3,
    Model4,
    Model5,
}

impl ModelId {
    pub const ALL: [ModelId; 5] =
        [Self::Model1, Self::Model2, Self::Model3, Self::Model4, Self::Model5];

    pub fn hidden(self) -> &'static [usize] {
        match self {
            Self::Model1 => &[10],
            Self::Model2 => &[10, 20],
            Self::Model3 => &[10, 20, 15],
            Self::Model4 => &[15, 20, 30, 20],
            Self::Model5 => &[20, 30, 40, 20, 10],
        }
    }

    pub fn layer_sizes(self) -> Vec<usize> {
        let mut sizes = vec![NUM_FEATURES];
        sizes.extend_from_slice(self.hidden());
        sizes.push(NUM_CLASSES);
        sizes
    }

    pub fn num_params(self) -> usize {
        param_count(&self.layer_sizes())
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = Self::ALL.iter().position(|m| m == self).expect("listed") + 1;
        write!(f, "model{n}")
    }
}

impl FromStr for ModelId {
    type Err = FlError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .iter()
            .copied()
            .find(|m| m.to_string().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| FlError::Invalid(format!("unknown model `{s}` (expected model1..model5)")))
    }
}

/// Weighted element-wise average, `Σ n_k w_k / Σ n_k`.
pub fn fed_avg(weights: &[FlatWeights], sizes: &[usize]) -> Result<FlatWeights, FlError> {
    if weights.is_empty() {
        return Err(FlError::Invalid("no client weights to average".into()));
    }
    if weights.len() != sizes.len() {
        return Err(FlError::LengthMismatch { expected: weights.len(), actual: sizes.len() });
    }
    if sizes.contains(&0) {
        return Err(FlError::Invalid("client sample counts must be positive".into()));
    }
    let p = weights[0].len();
    if let Some(w) = weights.iter().find(|w| w.len() != p) {
        return Err(FlError::LengthMismatch { expected: p, actual: w.len() });
    }
    let total: f64 = sizes.iter().map(|&n| n as f64).sum();
    let mut out = vec![0.0; p];
    for (w, &n) in weights.iter().zip(sizes) {
        let f = n as f64 / total;
        for (o, x) in out.iter_mut().zip(w) {
            *o += f * x;
        }
    }
    Ok(out)
}

/// `m = max(⌊C·K⌋, 1)` distinct ordinals from a seeded Fisher–Yates prefix.
pub fn select_clients(k: usize, fraction: f64, seed: u64) -> Result<Vec<usize>, FlError> {
    if k == 0 {
        return Err(FlError::Invalid("need at least one client".into()));
    }
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(FlError::Invalid(format!("participation fraction {fraction} not in (0, 1]")));
    }
    // the epsilon keeps 0.3·10 from landing on 2.999…
    let m = (((fraction * k as f64) + 1e-9).floor() as usize).clamp(1, k);
    let mut ids: Vec<usize> = (0..k).collect();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let (chosen, _) = ids.partial_shuffle(&mut rng, m);
    Ok(chosen.to_vec())
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;
    use rand::Rng;

    use super::*;

    #[test]
    fn parameter_counts() {
        // independent arithmetic: Σ n_in·n_out + n_out
        let oracle = |s: &[usize]| s.windows(2).map(|w| w[0] * w[1] + w[1]).sum::<usize>();
        assert_eq!(ModelId::Model1.num_params(), 45 * 10 + 10 + 10 * 19 + 19);
        assert_eq!(ModelId::Model1.num_params(), 669);
        assert_eq!(ModelId::Model5.num_params(), 4029);
        for m in ModelId::ALL {
            assert_eq!(m.num_params(), oracle(&m.layer_sizes()));
        }
    }

    #[test]
    fn model_names_round_trip() {
        for m in ModelId::ALL {
            assert_eq!(m.to_string().parse::<ModelId>().unwrap(), m);
        }
        assert!("model6".parse::<ModelId>().is_err());
    }

    #[test]
    fn fed_avg_examples() {
        let v = vec![0.25, -1.0, 3.0];
        assert_eq!(fed_avg(&[v.clone(), v.clone(), v.clone()], &[3, 9, 1]).unwrap(), v);
        assert_eq!(fed_avg(&[vec![0.0; 4], vec![1.0; 4]], &[5, 5]).unwrap(), vec![0.5; 4]);
        assert!(matches!(
            fed_avg(&[vec![0.0; 4], vec![1.0; 3]], &[1, 1]),
            Err(FlError::LengthMismatch { .. })
        ));
        assert!(fed_avg(&[vec![0.0]], &[0]).is_err());
    }

    #[test]
    fn fed_avg_matches_scalar_oracle() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let ws: Vec<FlatWeights> =
            (0..10).map(|_| (0..200).map(|_| rng.gen_range(-5.0..5.0)).collect()).collect();
        let ns: Vec<usize> = (0..10).map(|_| rng.gen_range(1..500)).collect();
        let out = fed_avg(&ws, &ns).unwrap();
        let total: usize = ns.iter().sum();
        for j in 0..200 {
            let mut acc = 0.0;
            for k in 0..10 {
                acc += ws[k][j] * ns[k] as f64;
            }
            assert!((out[j] - acc / total as f64).abs() <= 1e-12);
        }
    }

    #[test]
    fn selection_examples() {
        let all = select_clients(10, 1.0, 5).unwrap();
        let mut sorted = all.clone();
        sorted.sort();
        assert_eq!(sorted, (0..10).collect::<Vec<_>>());
        assert_eq!(select_clients(10, 0.01, 5).unwrap().len(), 1);
        assert_eq!(select_clients(10, 0.3, 5).unwrap().len(), 3);
        assert_eq!(select_clients(10, 0.5, 9).unwrap(), select_clients(10, 0.5, 9).unwrap());
        assert!(select_clients(0, 0.5, 1).is_err());
        assert!(select_clients(3, 0.0, 1).is_err());
        assert!(select_clients(3, 1.5, 1).is_err());
    }

    proptest! {
        #[test]
        fn fed_avg_permutation_invariant(seed in any::<u64>(), m in 1usize..8) {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let ws: Vec<FlatWeights> =
                (0..m).map(|_| (0..16).map(|_| rng.gen_range(-3.0..3.0)).collect()).collect();
            let ns: Vec<usize> = (0..m).map(|_| rng.gen_range(1..50)).collect();
            let mut order: Vec<usize> = (0..m).collect();
            order.shuffle(&mut rng);
            let ws2: Vec<_> = order.iter().map(|&i| ws[i].clone()).collect();
            let ns2: Vec<_> = order.iter().map(|&i| ns[i]).collect();
            let a = fed_avg(&ws, &ns).unwrap();
            let b = fed_avg(&ws2, &ns2).unwrap();
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() <= 1e-12);
            }
        }

        #[test]
        fn selection_is_distinct(k in 1usize..200, c in 0.001f64..=1.0, seed in any::<u64>()) {
            let s = select_clients(k, c, seed).unwrap();
            let expected = ((c * k as f64 + 1e-9).floor() as usize).max(1);
            prop_assert_eq!(s.len(), expected);
            let set: std::collections::HashSet<_> = s.iter().collect();
            prop_assert_eq!(set.len(), s.len());
            prop_assert!(s.iter().all(|&i| i < k));
        }
    }
}
