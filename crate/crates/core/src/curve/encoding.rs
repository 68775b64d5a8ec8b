//! Fixed-width big-endian encodings. Affine points are uncompressed; the point
//! at infinity is all zero bytes. G2 coordinates are laid out
//! `x.c0 ‖ x.c1 ‖ y.c0 ‖ y.c1`.

use ark_ec::AffineRepr;
use ark_ff::{BigInt, PrimeField};

use super::{check_g1, check_g2, CurveError, Fq, Fq2, Fr, G1Affine, G2Affine};

pub const FR_BYTES: usize = 32;
pub const G1_BYTES: usize = 64;
pub const G2_BYTES: usize = 128;

fn limbs_to_be(limbs: &[u64; 4]) -> [u8; 32] {
    let mut out = [0u8; 32];
    for (i, limb) in limbs.iter().enumerate() {
        out[32 - 8 * (i + 1)..32 - 8 * i].copy_from_slice(&limb.to_be_bytes());
    }
    out
}

fn be_to_limbs(bytes: &[u8]) -> [u64; 4] {
    let mut limbs = [0u64; 4];
    for (i, limb) in limbs.iter_mut().enumerate() {
        let mut word = [0u8; 8];
        word.copy_from_slice(&bytes[32 - 8 * (i + 1)..32 - 8 * i]);
        *limb = u64::from_be_bytes(word);
    }
    limbs
}

fn check_len(bytes: &[u8], expected: usize) -> Result<(), CurveError> {
    if bytes.len() != expected {
        return Err(CurveError::BadLength { expected, actual: bytes.len() });
    }
    Ok(())
}

pub fn fr_to_bytes(v: &Fr) -> [u8; 32] {
    limbs_to_be(&v.into_bigint().0)
}

/// Rejects values `>= r`.
pub fn fr_from_bytes(bytes: &[u8]) -> Result<Fr, CurveError> {
    check_len(bytes, FR_BYTES)?;
    Fr::from_bigint(BigInt::new(be_to_limbs(bytes))).ok_or(CurveError::NonCanonical)
}

fn fq_to_bytes(v: &Fq) -> [u8; 32] {
    limbs_to_be(&v.into_bigint().0)
}

fn fq_from_bytes(bytes: &[u8]) -> Result<Fq, CurveError> {
    Fq::from_bigint(BigInt::new(be_to_limbs(bytes))).ok_or(CurveError::NonCanonical)
}

pub fn g1_to_bytes(p: &G1Affine) -> [u8; G1_BYTES] {
    let mut out = [0u8; G1_BYTES];
    if let Some((x, y)) = p.xy() {
        out[..32].copy_from_slice(&fq_to_bytes(&x));
        out[32..].copy_from_slice(&fq_to_bytes(&y));
    }
    out
}

/// Decodes and validates curve and subgroup membership.
pub fn g1_from_bytes(bytes: &[u8]) -> Result<G1Affine, CurveError> {
    check_len(bytes, G1_BYTES)?;
    if bytes.iter().all(|b| *b == 0) {
        return Ok(G1Affine::zero());
    }
    let x = fq_from_bytes(&bytes[..32])?;
    let y = fq_from_bytes(&bytes[32..])?;
    let p = G1Affine::new_unchecked(x, y);
    check_g1(&p)?;
    Ok(p)
}

pub fn g2_to_bytes(q: &G2Affine) -> [u8; G2_BYTES] {
    let mut out = [0u8; G2_BYTES];
    if let Some((x, y)) = q.xy() {
        out[..32].copy_from_slice(&fq_to_bytes(&x.c0));
        out[32..64].copy_from_slice(&fq_to_bytes(&x.c1));
        out[64..96].copy_from_slice(&fq_to_bytes(&y.c0));
        out[96..].copy_from_slice(&fq_to_bytes(&y.c1));
    }
    out
}

pub fn g2_from_bytes(bytes: &[u8]) -> Result<G2Affine, CurveError> {
    check_len(bytes, G2_BYTES)?;
    if bytes.iter().all(|b| *b == 0) {
        return Ok(G2Affine::zero());
    }
    let x = Fq2::new(fq_from_bytes(&bytes[..32])?, fq_from_bytes(&bytes[32..64])?);
    let y = Fq2::new(fq_from_bytes(&bytes[64..96])?, fq_from_bytes(&bytes[96..])?);
    let q = G2Affine::new_unchecked(x, y);
    check_g2(&q)?;
    Ok(q)
}
