use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use super::{FlError, FlatWeights, MlpModel};

/// Keeps every weight well inside the codec range.
pub const WEIGHT_CLAMP: f64 = 1.0e6;

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch: usize,
    pub lr: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { epochs: 20, batch: 32, lr: 0.01, seed: 0 }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), FlError> {
        if self.epochs == 0 || self.batch == 0 {
            return Err(FlError::Invalid("epochs and batch size must be at least 1".into()));
        }
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            return Err(FlError::Invalid(format!("learning rate {} must be finite and ≥ 0", self.lr)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClientDataset {
    pub ordinal: usize,
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
}

impl ClientDataset {
    pub fn new(ordinal: usize, features: Vec<Vec<f64>>, labels: Vec<usize>) -> Result<Self, FlError> {
        if features.len() != labels.len() {
            return Err(FlError::LengthMismatch { expected: features.len(), actual: labels.len() });
        }
        Ok(Self { ordinal, features, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    fn check(&self, model: &MlpModel) -> Result<(), FlError> {
        let width = model.sizes()[0];
        let classes = *model.sizes().last().expect("sizes");
        for (row, (x, &y)) in self.features.iter().zip(&self.labels).enumerate() {
            if x.len() != width {
                return Err(FlError::LengthMismatch { expected: width, actual: x.len() });
            }
            if x.iter().any(|v| !v.is_finite()) {
                return Err(FlError::NonFinite { row });
            }
            if y >= classes {
                return Err(FlError::BadLabel { row, label: y });
            }
        }
        Ok(())
    }
}

/// Local minibatch SGD from `model`'s weights; the batch order is reshuffled
/// every epoch from `cfg.seed`.
pub fn client_update(model: &MlpModel, data: &ClientDataset, cfg: &TrainConfig) -> Result<FlatWeights, FlError> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(FlError::EmptyDataset);
    }
    data.check(model)?;
    let mut m = model.clone();
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch) {
            let (_, grad) = m.loss_and_grad(&data.features, &data.labels, batch);
            m.step(&grad, cfg.lr, WEIGHT_CLAMP);
        }
    }
    Ok(m.flatten())
}
