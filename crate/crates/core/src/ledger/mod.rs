//! A deterministic, single-queue chain simulator with EVM-flavoured gas
//! metering, the two verification contracts and a naive on-chain
//! aggregation contract used as the cost baseline.

mod chain;
mod log;

use std::fmt;
use std::str::FromStr;

use sha2::{Digest, Sha256};
use thiserror::Error;

pub use chain::{
    baseline_round, BaselineOutcome, BaselineState, ContractState, HashSumState, ProofVerifyState,
    SimChain,
};
pub use log::{parse_log, replay, LOG_HEADER};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LedgerError {
    #[error("no contract at {0}")]
    UnknownContract(Address),
    #[error("contract at {address} is a {actual}, not a {expected}")]
    WrongContract { address: Address, expected: &'static str, actual: &'static str },
    #[error("bad transaction log line {line}: {reason}")]
    Log { line: usize, reason: String },
    #[error("replay diverged at transaction {index}: {reason}")]
    Replay { index: usize, reason: String },
    #[error("invalid argument: {0}")]
    Invalid(String),
}

/// How calldata bytes are priced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CalldataPricing {
    /// Every byte at the nonzero rate: gas depends only on payload size.
    Flat,
    /// EVM rule: zero bytes at the cheaper rate.
    ZeroAware,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GasSchedule {
    pub tx_base: u64,
    pub calldata_nonzero_byte: u64,
    pub calldata_zero_byte: u64,
    pub sstore_new: u64,
    pub sstore_update: u64,
    pub sload: u64,
    pub arith_add: u64,
    pub arith_mul: u64,
    pub ecadd: u64,
    pub ecmul: u64,
    pub pairing_base: u64,
    pub pairing_per_pair: u64,
    pub contract_deploy: u64,
    pub pricing: CalldataPricing,
}

impl Default for GasSchedule {
    fn default() -> Self {
        Self {
            tx_base: 21_000,
            calldata_nonzero_byte: 16,
            calldata_zero_byte: 4,
            sstore_new: 20_000,
            sstore_update: 5_000,
            sload: 2_100,
            arith_add: 3,
            arith_mul: 5,
            ecadd: 150,
            ecmul: 6_000,
            pairing_base: 45_000,
            pairing_per_pair: 34_000,
            contract_deploy: 300_000,
            pricing: CalldataPricing::Flat,
        }
    }
}

impl GasSchedule {
    pub fn calldata(&self, data: &[u8]) -> u64 {
        match self.pricing {
            CalldataPricing::Flat => data.len() as u64 * self.calldata_nonzero_byte,
            CalldataPricing::ZeroAware => data
                .iter()
                .map(|&b| if b == 0 { self.calldata_zero_byte } else { self.calldata_nonzero_byte })
                .sum(),
        }
    }

    /// Pairing-check cost for `publics` inputs: one ECMUL+ECADD each to fold
    /// `vk_x`, then a four-pair product.
    pub fn verify_compute(&self, publics: usize) -> u64 {
        publics as u64 * (self.ecmul + self.ecadd) + self.pairing_base + 4 * self.pairing_per_pair
    }
}

/// 20-byte account or contract address.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Address(pub [u8; 20]);

impl Address {
    /// Deterministic address for a named party, e.g. `client-3`.
    pub fn from_label(label: &str) -> Self {
        let digest = Sha256::digest(label.as_bytes());
        let mut out = [0u8; 20];
        out.copy_from_slice(&digest[..20]);
        Self(out)
    }

    pub fn client(ordinal: usize) -> Self {
        Self::from_label(&format!("client-{ordinal}"))
    }

    pub fn server() -> Self {
        Self::from_label("server")
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x{}", hex::encode(self.0))
    }
}

impl fmt::Debug for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Address {
    type Err = LedgerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let raw = hex::decode(s.trim_start_matches("0x"))
            .map_err(|e| LedgerError::Invalid(format!("address `{s}`: {e}")))?;
        let bytes: [u8; 20] = raw
            .try_into()
            .map_err(|_| LedgerError::Invalid(format!("address `{s}` is not 20 bytes")))?;
        Ok(Self(bytes))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ContractKind {
    HashSum,
    ProofVerify,
    Baseline,
}

impl ContractKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::HashSum => "hash_sum",
            Self::ProofVerify => "proof_verify",
            Self::Baseline => "baseline",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TxKind {
    Deploy(ContractKind),
    SubmitHash,
    Finalize,
    VerifyProof,
    BaselineSubmit,
}

impl TxKind {
    const ALL: [TxKind; 7] = [
        TxKind::Deploy(ContractKind::HashSum),
        TxKind::Deploy(ContractKind::ProofVerify),
        TxKind::Deploy(ContractKind::Baseline),
        TxKind::SubmitHash,
        TxKind::Finalize,
        TxKind::VerifyProof,
        TxKind::BaselineSubmit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Deploy(ContractKind::HashSum) => "deploy_hash_sum",
            Self::Deploy(ContractKind::ProofVerify) => "deploy_proof_verify",
            Self::Deploy(ContractKind::Baseline) => "deploy_baseline",
            Self::SubmitHash => "submit_hash",
            Self::Finalize => "finalize",
            Self::VerifyProof => "verify_proof",
            Self::BaselineSubmit => "baseline_submit",
        }
    }
}

impl FromStr for TxKind {
    type Err = LedgerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| LedgerError::Invalid(format!("unknown transaction kind `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TxStatus {
    Success,
    Revert(String),
}

impl TxStatus {
    pub fn is_success(&self) -> bool {
        matches!(self, Self::Success)
    }
}

/// What a successful call hands back.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TxOutput {
    None,
    Created(Address),
    Bool(bool),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Receipt {
    pub index: usize,
    pub gas: u64,
    pub status: TxStatus,
    pub output: TxOutput,
}

impl Receipt {
    pub fn is_success(&self) -> bool {
        self.status.is_success()
    }

    /// `Some(b)` for a successful boolean call.
    pub fn bool_output(&self) -> Option<bool> {
        match (&self.status, &self.output) {
            (TxStatus::Success, TxOutput::Bool(b)) => Some(*b),
            _ => None,
        }
    }

    pub fn created(&self) -> Option<Address> {
        match (&self.status, &self.output) {
            (TxStatus::Success, TxOutput::Created(a)) => Some(*a),
            _ => None,
        }
    }
}

/// One line of the audit log.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TxRecord {
    pub sender: Address,
    /// Target contract; `None` for deployments.
    pub contract: Option<Address>,
    pub kind: TxKind,
    pub calldata: Vec<u8>,
    pub gas: u64,
    pub success: bool,
}
