//! BN254 (alt_bn128) substrate: scalar field, curve groups, pairing, FFT and
//! a bucket-method MSM.
//!
//! Field and group arithmetic come from `ark-bn254`; everything layered on top
//! (MSM, FFT, byte encodings, checked helpers) lives here.

mod encoding;
mod fft;
mod msm;

use ark_ec::pairing::{Pairing, PairingOutput};
use ark_ec::{AffineRepr, CurveGroup};
use ark_ff::{Field, PrimeField};
use rand::RngCore;
use thiserror::Error;

pub use ark_bn254::{Bn254, Fq, Fq2, Fr, G1Affine, G1Projective, G2Affine, G2Projective};
pub use encoding::{
    fr_from_bytes, fr_to_bytes, g1_from_bytes, g1_to_bytes, g2_from_bytes, g2_to_bytes,
    FR_BYTES, G1_BYTES, G2_BYTES,
};
pub use fft::{fft, EvaluationDomain};
pub use msm::{g1_msm, g2_msm, msm, FixedBaseTable};

/// Target group of the pairing (written additively by arkworks).
pub type Gt = PairingOutput<Bn254>;

/// Two-adicity of the scalar field: the largest power-of-two FFT domain is `2^28`.
pub const FR_TWO_ADICITY: u32 = 28;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CurveError {
    #[error("inverse of zero in the scalar field")]
    ZeroInverse,
    #[error("length mismatch: {left} points vs {right} scalars")]
    LengthMismatch { left: usize, right: usize },
    #[error("point is not on the curve")]
    NotOnCurve,
    #[error("point is not in the prime-order subgroup")]
    NotInSubgroup,
    #[error("non-canonical field encoding")]
    NonCanonical,
    #[error("expected {expected} bytes, got {actual}")]
    BadLength { expected: usize, actual: usize },
    #[error("FFT length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("FFT length {0} exceeds the field's two-adicity")]
    DomainTooLarge(usize),
}

/// Inverse that refuses zero instead of returning a sentinel.
pub fn fr_inverse(a: &Fr) -> Result<Fr, CurveError> {
    a.inverse().ok_or(CurveError::ZeroInverse)
}

pub fn fr_pow(a: &Fr, exp: u64) -> Fr {
    a.pow([exp])
}

/// Uniform scalar from any RNG (rejection sampling on 254-bit candidates).
pub fn random_fr<R: RngCore + ?Sized>(rng: &mut R) -> Fr {
    loop {
        let mut bytes = [0u8; 32];
        rng.fill_bytes(&mut bytes);
        bytes[0] &= 0x3f;
        if let Ok(v) = fr_from_bytes(&bytes) {
            return v;
        }
    }
}

pub fn random_nonzero_fr<R: RngCore + ?Sized>(rng: &mut R) -> Fr {
    loop {
        let v = random_fr(rng);
        if !ark_ff::Zero::is_zero(&v) {
            return v;
        }
    }
}

pub fn fr_from_u64(v: u64) -> Fr {
    Fr::from(v)
}

pub fn fr_from_u128(v: u128) -> Fr {
    Fr::from(v)
}

/// Low 128 bits of the canonical representative; `None` if the value is wider.
pub fn fr_to_u128(v: &Fr) -> Option<u128> {
    let limbs = v.into_bigint().0;
    if limbs[2] != 0 || limbs[3] != 0 {
        return None;
    }
    Some(limbs[0] as u128 | ((limbs[1] as u128) << 64))
}

pub fn g1_generator() -> G1Affine {
    G1Affine::generator()
}

pub fn g2_generator() -> G2Affine {
    G2Affine::generator()
}

pub fn check_g1(p: &G1Affine) -> Result<(), CurveError> {
    if p.is_zero() {
        return Ok(());
    }
    if !p.is_on_curve() {
        return Err(CurveError::NotOnCurve);
    }
    if !p.is_in_correct_subgroup_assuming_on_curve() {
        return Err(CurveError::NotInSubgroup);
    }
    Ok(())
}

pub fn check_g2(q: &G2Affine) -> Result<(), CurveError> {
    if q.is_zero() {
        return Ok(());
    }
    if !q.is_on_curve() {
        return Err(CurveError::NotOnCurve);
    }
    if !q.is_in_correct_subgroup_assuming_on_curve() {
        return Err(CurveError::NotInSubgroup);
    }
    Ok(())
}

/// Optimal ate pairing with input validation.
pub fn pairing(p: &G1Affine, q: &G2Affine) -> Result<Gt, CurveError> {
    check_g1(p)?;
    check_g2(q)?;
    Ok(Bn254::pairing(*p, *q))
}

/// Product of pairings, sharing a single final exponentiation.
pub fn multi_pairing(pairs: &[(G1Affine, G2Affine)]) -> Result<Gt, CurveError> {
    for (p, q) in pairs {
        check_g1(p)?;
        check_g2(q)?;
    }
    Ok(Bn254::multi_pairing(
        pairs.iter().map(|(p, _)| *p),
        pairs.iter().map(|(_, q)| *q),
    ))
}

/// `scalar * P` by the library's scalar multiplication, in affine form.
pub fn g1_mul(p: &G1Affine, s: &Fr) -> G1Affine {
    (*p * s).into_affine()
}

pub fn g2_mul(q: &G2Affine, s: &Fr) -> G2Affine {
    (*q * s).into_affine()
}
