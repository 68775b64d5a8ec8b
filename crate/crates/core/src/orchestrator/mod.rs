//! Drives whole protocol rounds: local training, encoding, proving, the
//! on-chain checks and every client's own verification, plus the experiment
//! grid that turns rounds into CSV rows.

mod dataset;
mod experiment;
mod round;

use std::fmt;
use std::path::{Path, PathBuf};

use thiserror::Error;

pub use dataset::{load_dataset, partition, synthetic, Dataset, DatasetSource, SYNTH_CENTER_SD};
pub use experiment::{
    accuracy_curve, run_experiment, write_csv, ExperimentGrid, ExperimentRow, Verified,
};
pub use round::{
    gas_dry_run, peak_memory_kb, read_artifacts, verify_artifacts, write_artifacts, Architecture,
    Contributions, GasBreakdown, Party, Protocol, ProveMode, RoundArtifacts, RoundConfig,
    RoundFailure, RoundRecord, ServerOutput, Stage, Tamper, TamperPoint,
};

use crate::agg_circuit::AggError;
use crate::fl::FlError;
use crate::groth16::Groth16Error;
use crate::ledger::LedgerError;

#[derive(Debug, Error)]
pub enum OrchestratorError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: {reason}")]
    Parse { path: PathBuf, line: usize, reason: String },
    #[error("dataset: {0}")]
    Dataset(String),
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Fl(#[from] FlError),
    #[error(transparent)]
    Agg(#[from] AggError),
    #[error(transparent)]
    Groth16(#[from] Groth16Error),
    #[error(transparent)]
    Ledger(#[from] LedgerError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("round failed: {0}")]
    Round(RoundFailure),
}

impl OrchestratorError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io { path: path.to_path_buf(), source }
    }

    /// The structured failure, if this is a protocol-level rejection.
    pub fn round_failure(&self) -> Option<&RoundFailure> {
        match self {
            Self::Round(f) => Some(f),
            _ => None,
        }
    }
}

impl fmt::Display for RoundFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} stage, {}: {}", self.stage, self.party, self.reason)
    }
}
