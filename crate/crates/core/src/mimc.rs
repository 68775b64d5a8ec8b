//! MiMC7 over the BN254 scalar field: `F_i(x) = (x + k + c_i)^7`, `r` rounds,
//! key added once more at the end. Vectors are hashed with a
//! Miyaguchi–Preneel chain, `s_{i+1} = s_i + x_i + E(x_i, s_i)`.

use ark_ff::{BigInteger, Field, PrimeField, Zero};
use rand::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;
use thiserror::Error;

use crate::curve::{fr_from_u128, fr_from_u64, Fr};
use crate::r1cs::{ConstraintSink, LinearCombination, R1csError, Variable};

pub const DEFAULT_ROUNDS: usize = 91;
pub const DEFAULT_SEED: u64 = 0x006D_696D_6337;
/// Encoded parameters per packed field element.
pub const PACK: usize = 3;
/// Multiplication constraints per cipher call at the default round count.
pub const GADGET_CONSTRAINTS: usize = 4 * DEFAULT_ROUNDS;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MimcError {
    #[error("round count must be at least 1")]
    ZeroRounds,
    #[error("cannot hash an empty vector")]
    EmptyInput,
    #[error(transparent)]
    R1cs(#[from] R1csError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MimcParams {
    constants: Vec<Fr>,
}

impl MimcParams {
    pub fn new(seed: u64, rounds: usize) -> Result<Self, MimcError> {
        Ok(Self { constants: round_constants(seed, rounds)? })
    }

    pub fn rounds(&self) -> usize {
        self.constants.len()
    }

    pub fn constants(&self) -> &[Fr] {
        &self.constants
    }

    /// Big-endian bytes of the constants table, for cross-party comparison.
    pub fn constants_bytes(&self) -> Vec<u8> {
        self.constants.iter().flat_map(|c| c.into_bigint().to_bytes_be()).collect()
    }
}

impl Default for MimcParams {
    fn default() -> Self {
        Self::new(DEFAULT_SEED, DEFAULT_ROUNDS).expect("default round count is positive")
    }
}

/// `c_0 = 0`; every later constant eats four consecutive SplitMix64 words,
/// little-endian, reduced mod the group order.
pub fn round_constants(seed: u64, rounds: usize) -> Result<Vec<Fr>, MimcError> {
    if rounds == 0 {
        return Err(MimcError::ZeroRounds);
    }
    let mut stream = SplitMix64::seed_from_u64(seed);
    let mut out = Vec::with_capacity(rounds);
    out.push(Fr::zero());
    for _ in 1..rounds {
        let mut bytes = [0u8; 32];
        for chunk in bytes.chunks_mut(8) {
            chunk.copy_from_slice(&stream.next_u64().to_le_bytes());
        }
        out.push(Fr::from_le_bytes_mod_order(&bytes));
    }
    Ok(out)
}

#[inline]
fn pow7(t: Fr) -> Fr {
    let t2 = t.square();
    let t4 = t2.square();
    t4 * t2 * t
}

pub fn mimc7_encrypt(x: Fr, k: Fr, params: &MimcParams) -> Fr {
    let mut state = x;
    for c in &params.constants {
        state = pow7(state + k + c);
    }
    state + k
}

pub fn mimc7_hash_vec(xs: &[Fr], params: &MimcParams) -> Result<Fr, MimcError> {
    if xs.is_empty() {
        return Err(MimcError::EmptyInput);
    }
    Ok(xs.iter().fold(Fr::zero(), |s, &x| s + x + mimc7_encrypt(x, s, params)))
}

/// Packs `e0 + e1·2^64 + e2·2^128` per field element; the tail is zero-padded.
pub fn pack(encoded: &[u64]) -> Vec<Fr> {
    encoded
        .chunks(PACK)
        .map(|c| {
            let lo = c[0] as u128 | (c.get(1).copied().unwrap_or(0) as u128) << 64;
            let hi = c.get(2).copied().unwrap_or(0);
            fr_from_u128(lo) + fr_from_u64(hi) * shift_128()
        })
        .collect()
}

/// Digest of an encoded weight vector, as every party computes it.
pub fn hash_encoded(encoded: &[u64], params: &MimcParams) -> Result<Fr, MimcError> {
    mimc7_hash_vec(&pack(encoded), params)
}

fn shift_128() -> Fr {
    fr_from_u128(1u128 << 64).square()
}

/// The in-circuit counterpart of [`pack`] over already-allocated variables.
pub fn pack_lcs(vars: &[Variable]) -> Vec<LinearCombination> {
    let s64 = fr_from_u128(1u128 << 64);
    let s128 = shift_128();
    vars.chunks(PACK)
        .map(|c| {
            let mut lc = LinearCombination::from(c[0]);
            if let Some(&v) = c.get(1) {
                lc.add_term(v, s64);
            }
            if let Some(&v) = c.get(2) {
                lc.add_term(v, s128);
            }
            lc
        })
        .collect()
}

/// Runs all rounds on `x` under key `k` and returns a fresh variable equal to
/// `permutation(x, k) + offset`. Four rows per round; the last round folds the
/// offset into its output row so no extra constraint is needed.
fn rounds_gadget<CS: ConstraintSink + ?Sized>(
    cs: &mut CS,
    x: LinearCombination,
    k: &LinearCombination,
    offset: &LinearCombination,
    params: &MimcParams,
) -> Result<Variable, MimcError> {
    let mut state = x;
    let last = params.rounds() - 1;
    for (i, c) in params.constants.iter().enumerate() {
        let t = state.clone() + k + &LinearCombination::constant(*c);
        let tv = cs.eval(&t);
        let t2 = cs.alloc_witness(tv.map(|v| v.square()))?;
        cs.enforce(t.clone(), t.clone(), t2.into())?;
        let t4 = cs.alloc_witness(cs.eval(&t2.into()).map(|v| v.square()))?;
        cs.enforce(t2.into(), t2.into(), t4.into())?;
        let t6 = cs.alloc_witness(
            cs.eval(&t4.into()).zip(cs.eval(&t2.into())).map(|(a, b)| a * b),
        )?;
        cs.enforce(t4.into(), t2.into(), t6.into())?;
        let t7 = cs.eval(&t6.into()).zip(tv).map(|(a, b)| a * b);
        if i == last {
            let out = cs.alloc_witness(t7.zip(cs.eval(offset)).map(|(a, b)| a + b))?;
            cs.enforce(t6.into(), t, LinearCombination::from(out) - offset)?;
            return Ok(out);
        }
        let next = cs.alloc_witness(t7)?;
        cs.enforce(t6.into(), t, next.into())?;
        state = next.into();
    }
    unreachable!("params always hold at least one round")
}

/// Constrains a fresh output variable to `mimc7_encrypt(x, k)`.
pub fn mimc7_gadget<CS: ConstraintSink + ?Sized>(
    cs: &mut CS,
    x: LinearCombination,
    k: LinearCombination,
    params: &MimcParams,
) -> Result<Variable, MimcError> {
    rounds_gadget(cs, x, &k, &k, params)
}

/// Chained digest of `xs`; `rounds · 4` rows per element.
pub fn mimc7_hash_gadget<CS: ConstraintSink + ?Sized>(
    cs: &mut CS,
    xs: &[LinearCombination],
    params: &MimcParams,
) -> Result<Variable, MimcError> {
    let (first, rest) = xs.split_first().ok_or(MimcError::EmptyInput)?;
    // s_1 = 0 + x + E(x, 0)
    let mut s = rounds_gadget(cs, first.clone(), &LinearCombination::zero(), first, params)?;
    for x in rest {
        let k = LinearCombination::from(s);
        // s + x + (P(x, s) + s)
        let offset = k.clone().scale(Fr::from(2u64)) + x;
        s = rounds_gadget(cs, x.clone(), &k, &offset, params)?;
    }
    Ok(s)
}
