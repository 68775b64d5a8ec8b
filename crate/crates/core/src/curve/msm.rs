//! Variable-base MSM (Pippenger bucket method) and fixed-base windowed
//! multiplication used by key generation.

use ark_ec::{AffineRepr, CurveGroup};
use ark_ff::{BigInteger, PrimeField, Zero};
use rayon::prelude::*;

use super::{CurveError, Fr, G1Affine, G1Projective, G2Affine, G2Projective};

const SCALAR_BITS: usize = 254;

fn bucket_window(n: usize) -> usize {
    if n < 32 {
        3
    } else {
        let log = usize::BITS - n.leading_zeros() - 1;
        ((log as usize * 69) / 100 + 2).clamp(4, 16)
    }
}

#[inline]
fn digit(limbs: &[u64; 4], offset: usize, width: usize) -> usize {
    let limb = offset / 64;
    let shift = offset % 64;
    let mut v = limbs[limb] >> shift;
    if shift + width > 64 && limb + 1 < 4 {
        v |= limbs[limb + 1] << (64 - shift);
    }
    (v & ((1u64 << width) - 1)) as usize
}

/// `Σ scalars[i] · bases[i]`.
///
/// Output does not depend on the thread count: windows are summed in a fixed
/// order after the parallel bucket phase.
pub fn msm<G>(bases: &[G::Affine], scalars: &[Fr]) -> Result<G, CurveError>
where
    G: CurveGroup<ScalarField = Fr>,
{
    if bases.len() != scalars.len() {
        return Err(CurveError::LengthMismatch { left: bases.len(), right: scalars.len() });
    }
    let pairs: Vec<(G::Affine, [u64; 4])> = bases
        .iter()
        .zip(scalars)
        .filter(|(b, s)| !s.is_zero() && !b.is_zero())
        .map(|(b, s)| (*b, s.into_bigint().0))
        .collect();
    if pairs.is_empty() {
        return Ok(G::zero());
    }
    let max_bits = pairs
        .iter()
        .map(|(_, l)| ark_ff::BigInt::<4>::new(*l).num_bits() as usize)
        .max()
        .unwrap_or(0);
    let width = bucket_window(pairs.len());
    let offsets: Vec<usize> = (0..max_bits.min(SCALAR_BITS)).step_by(width).collect();

    let window_sums: Vec<G> = offsets
        .par_iter()
        .map(|&offset| {
            let w = width.min(SCALAR_BITS - offset);
            let mut buckets = vec![G::zero(); (1 << w) - 1];
            for (base, limbs) in &pairs {
                let d = digit(limbs, offset, w);
                if d != 0 {
                    buckets[d - 1] += base;
                }
            }
            let mut running = G::zero();
            let mut sum = G::zero();
            for b in buckets.iter().rev() {
                running += b;
                sum += running;
            }
            sum
        })
        .collect();

    let mut acc = G::zero();
    for (i, ws) in window_sums.iter().enumerate().rev() {
        if i + 1 < window_sums.len() {
            for _ in 0..width {
                acc.double_in_place();
            }
        }
        acc += ws;
    }
    Ok(acc)
}

pub fn g1_msm(points: &[G1Affine], scalars: &[Fr]) -> Result<G1Projective, CurveError> {
    msm::<G1Projective>(points, scalars)
}

pub fn g2_msm(points: &[G2Affine], scalars: &[Fr]) -> Result<G2Projective, CurveError> {
    msm::<G2Projective>(points, scalars)
}

/// Precomputed multiples `k · 2^(w·i) · G` for one fixed base.
pub struct FixedBaseTable<G: CurveGroup> {
    window: usize,
    rows: Vec<Vec<G::Affine>>,
}

impl<G> FixedBaseTable<G>
where
    G: CurveGroup<ScalarField = Fr>,
{
    /// Table sized for roughly `expected_muls` multiplications.
    pub fn new(base: G, expected_muls: usize) -> Self {
        let window = if expected_muls < 32 {
            3
        } else {
            let log = (usize::BITS - expected_muls.leading_zeros()) as usize;
            (log * 7 / 10).clamp(4, 14)
        };
        let num_rows = SCALAR_BITS.div_ceil(window);
        let mut rows = Vec::with_capacity(num_rows);
        let mut row_base = base;
        for _ in 0..num_rows {
            let mut row = Vec::with_capacity(1 << window);
            let mut cur = G::zero();
            for _ in 0..(1 << window) {
                row.push(cur);
                cur += row_base;
            }
            rows.push(G::normalize_batch(&row));
            for _ in 0..window {
                row_base.double_in_place();
            }
        }
        Self { window, rows }
    }

    pub fn mul(&self, s: &Fr) -> G {
        let limbs = s.into_bigint().0;
        let mut acc = G::zero();
        for (i, row) in self.rows.iter().enumerate() {
            let offset = i * self.window;
            let w = self.window.min(SCALAR_BITS - offset);
            let d = digit(&limbs, offset, w);
            if d != 0 {
                acc += row[d];
            }
        }
        acc
    }

    /// Multiplies every scalar and normalizes the results in batches.
    pub fn batch_mul(&self, scalars: &[Fr]) -> Vec<G::Affine> {
        const CHUNK: usize = 4096;
        scalars
            .par_chunks(CHUNK)
            .flat_map_iter(|chunk| {
                let proj: Vec<G> = chunk.iter().map(|s| self.mul(s)).collect();
                G::normalize_batch(&proj)
            })
            .collect()
    }
}
