//! Groth16 over BN254: key generation from a QAP, randomized proving, and the
//! single pairing-product verification equation
//! `e(A,B) = e(α,β) · e(vk_x,γ) · e(C,δ)`.

mod encoding;
mod prover;
mod setup;
mod verifier;

use std::sync::Arc;

use thiserror::Error;

use crate::curve::{CurveError, G1Affine, G2Affine, Gt};
use crate::qap::{Qap, QapError};

pub use encoding::{decode_public_inputs, encode_public_inputs, PROOF_BYTES};
pub use prover::prove;
#[cfg(any(test, feature = "insecure-trapdoor"))]
pub use setup::setup_with_trapdoor;
pub use setup::{setup, ToxicWaste};
pub use verifier::verify;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Groth16Error {
    #[error(transparent)]
    Qap(#[from] QapError),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error("public input {0} is not referenced by any constraint")]
    UnboundPublicInput(usize),
    #[error("expected {expected} public inputs, got {actual}")]
    PublicInputCount { expected: usize, actual: usize },
    #[error("expected {expected} witness values, got {actual}")]
    WitnessCount { expected: usize, actual: usize },
    #[error("unsatisfied circuit: constraint {constraint} does not hold")]
    Unsatisfied { constraint: usize },
    #[error("malformed encoding: {0}")]
    Encoding(String),
}

#[derive(Clone, Debug)]
pub struct VerifyingKey {
    pub alpha_g1: G1Affine,
    pub beta_g2: G2Affine,
    pub gamma_g2: G2Affine,
    pub delta_g2: G2Affine,
    /// `ic[0]` pairs with the constant one, `ic[i]` with public input `i`.
    pub ic: Vec<G1Affine>,
    alpha_beta: Gt,
}

impl PartialEq for VerifyingKey {
    fn eq(&self, other: &Self) -> bool {
        self.alpha_g1 == other.alpha_g1
            && self.beta_g2 == other.beta_g2
            && self.gamma_g2 == other.gamma_g2
            && self.delta_g2 == other.delta_g2
            && self.ic == other.ic
    }
}

impl Eq for VerifyingKey {}

impl VerifyingKey {
    pub fn new(
        alpha_g1: G1Affine,
        beta_g2: G2Affine,
        gamma_g2: G2Affine,
        delta_g2: G2Affine,
        ic: Vec<G1Affine>,
    ) -> Result<Self, CurveError> {
        let alpha_beta = crate::curve::pairing(&alpha_g1, &beta_g2)?;
        Ok(Self { alpha_g1, beta_g2, gamma_g2, delta_g2, ic, alpha_beta })
    }

    pub fn num_public(&self) -> usize {
        self.ic.len() - 1
    }

    /// Cached `e(α, β)`.
    pub fn alpha_beta(&self) -> &Gt {
        &self.alpha_beta
    }
}

/// Prover-side CRS. Holds the QAP so proving needs only the assignment.
#[derive(Clone, Debug)]
pub struct ProvingKey {
    pub vk: VerifyingKey,
    pub beta_g1: G1Affine,
    pub delta_g1: G1Affine,
    /// `A_i(τ)·G1` for every variable.
    pub a_query: Vec<G1Affine>,
    /// `B_i(τ)·G1` for every variable.
    pub b_g1_query: Vec<G1Affine>,
    /// `B_i(τ)·G2` for every variable.
    pub b_g2_query: Vec<G2Affine>,
    /// `τ^i · t(τ)/δ · G1`, `i < n − 1`.
    pub h_query: Vec<G1Affine>,
    /// `(β·A_i(τ) + α·B_i(τ) + C_i(τ))/δ · G1` for every private witness.
    pub l_query: Vec<G1Affine>,
    qap: Arc<Qap>,
}

impl ProvingKey {
    pub fn qap(&self) -> &Qap {
        &self.qap
    }

    pub fn num_public(&self) -> usize {
        self.qap.num_public()
    }

    pub fn num_witness(&self) -> usize {
        self.qap.num_witness()
    }

    /// Curve elements only; the QAP is compared by identity of its topology.
    pub fn same_elements(&self, other: &Self) -> bool {
        self.vk == other.vk
            && self.beta_g1 == other.beta_g1
            && self.delta_g1 == other.delta_g1
            && self.a_query == other.a_query
            && self.b_g1_query == other.b_g1_query
            && self.b_g2_query == other.b_g2_query
            && self.h_query == other.h_query
            && self.l_query == other.l_query
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Proof {
    pub a: G1Affine,
    pub b: G2Affine,
    pub c: G1Affine,
}

#[cfg(test)]
mod tests;
