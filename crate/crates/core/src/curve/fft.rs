//! Radix-2 FFT over power-of-two multiplicative subgroups of `Fr`.

use ark_ff::{FftField, Field, One, Zero};
use rayon::prelude::*;

use super::{CurveError, Fr, FR_TWO_ADICITY};

/// The subgroup `{ω^0, …, ω^(n-1)}` and its coset `g·{ω^i}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvaluationDomain {
    size: usize,
    log_size: u32,
    generator: Fr,
    generator_inv: Fr,
    size_inv: Fr,
    coset_shift: Fr,
    coset_shift_inv: Fr,
}

impl EvaluationDomain {
    /// Exact power-of-two domain.
    pub fn new(size: usize) -> Result<Self, CurveError> {
        if size == 0 || !size.is_power_of_two() {
            return Err(CurveError::NotPowerOfTwo(size));
        }
        let log_size = size.trailing_zeros();
        if log_size > FR_TWO_ADICITY {
            return Err(CurveError::DomainTooLarge(size));
        }
        let generator = Fr::get_root_of_unity(size as u64).ok_or(CurveError::DomainTooLarge(size))?;
        let coset_shift = Fr::GENERATOR;
        Ok(Self {
            size,
            log_size,
            generator,
            generator_inv: generator.inverse().expect("root of unity is nonzero"),
            size_inv: Fr::from(size as u64).inverse().expect("size < r"),
            coset_shift,
            coset_shift_inv: coset_shift.inverse().expect("generator is nonzero"),
        })
    }

    /// Smallest power-of-two domain holding at least `min_size` points.
    pub fn for_size(min_size: usize) -> Result<Self, CurveError> {
        Self::new(min_size.max(1).next_power_of_two())
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn log_size(&self) -> u32 {
        self.log_size
    }

    /// Primitive `n`-th root of unity ω.
    pub fn generator(&self) -> Fr {
        self.generator
    }

    pub fn coset_shift(&self) -> Fr {
        self.coset_shift
    }

    pub fn element(&self, i: usize) -> Fr {
        self.generator.pow([i as u64])
    }

    /// `t(x) = x^n - 1` evaluated at `x`.
    pub fn vanishing_at(&self, x: &Fr) -> Fr {
        x.pow([self.size as u64]) - Fr::one()
    }

    /// Coefficients of `t(x) = x^n - 1`, lowest degree first.
    pub fn vanishing_coefficients(&self) -> Vec<Fr> {
        let mut t = vec![Fr::zero(); self.size + 1];
        t[0] = -Fr::one();
        t[self.size] = Fr::one();
        t
    }

    /// All Lagrange basis polynomials of the domain evaluated at `tau`:
    /// `L_i(τ) = (τ^n - 1) · ω^i / (n · (τ - ω^i))`. Requires `τ` outside the domain.
    pub fn lagrange_at(&self, tau: &Fr) -> Option<Vec<Fr>> {
        let z = self.vanishing_at(tau);
        if z.is_zero() {
            return None;
        }
        let mut denoms = Vec::with_capacity(self.size);
        let mut omega_i = Fr::one();
        let mut numer_omega = Vec::with_capacity(self.size);
        for _ in 0..self.size {
            denoms.push(*tau - omega_i);
            numer_omega.push(omega_i);
            omega_i *= self.generator;
        }
        ark_ff::batch_inversion(&mut denoms);
        let scale = z * self.size_inv;
        Some(
            denoms
                .into_iter()
                .zip(numer_omega)
                .map(|(d, w)| scale * w * d)
                .collect(),
        )
    }

    /// Coefficients → evaluations on the domain.
    pub fn fft_in_place(&self, values: &mut [Fr]) {
        assert_eq!(values.len(), self.size, "vector length must equal domain size");
        radix2(values, self.generator, self.log_size);
    }

    /// Evaluations on the domain → coefficients.
    pub fn ifft_in_place(&self, values: &mut [Fr]) {
        assert_eq!(values.len(), self.size, "vector length must equal domain size");
        radix2(values, self.generator_inv, self.log_size);
        values.par_iter_mut().for_each(|v| *v *= self.size_inv);
    }

    /// Coefficients → evaluations on the coset `g·H`.
    pub fn coset_fft_in_place(&self, values: &mut [Fr]) {
        scale_by_powers(values, self.coset_shift);
        self.fft_in_place(values);
    }

    /// Evaluations on the coset `g·H` → coefficients.
    pub fn coset_ifft_in_place(&self, values: &mut [Fr]) {
        self.ifft_in_place(values);
        scale_by_powers(values, self.coset_shift_inv);
    }

    /// Value of `t(x)` on every coset point; constant `g^n - 1`.
    pub fn vanishing_on_coset(&self) -> Fr {
        self.vanishing_at(&self.coset_shift)
    }
}

fn scale_by_powers(values: &mut [Fr], g: Fr) {
    const CHUNK: usize = 1 << 12;
    values.par_chunks_mut(CHUNK).enumerate().for_each(|(ci, chunk)| {
        let mut pow = g.pow([(ci * CHUNK) as u64]);
        for v in chunk.iter_mut() {
            *v *= pow;
            pow *= g;
        }
    });
}

fn bit_reverse(values: &mut [Fr], log_n: u32) {
    if log_n == 0 {
        return;
    }
    let n = values.len();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - log_n);
        if i < j {
            values.swap(i, j);
        }
    }
}

/// Iterative Cooley–Tukey, decimation in time.
fn radix2(values: &mut [Fr], omega: Fr, log_n: u32) {
    let n = values.len();
    bit_reverse(values, log_n);
    let mut twiddles = Vec::with_capacity(n / 2);
    let mut w = Fr::one();
    for _ in 0..n / 2 {
        twiddles.push(w);
        w *= omega;
    }
    let mut half = 1;
    while half < n {
        let stride = n / (2 * half);
        let butterfly = |block: &mut [Fr]| {
            let (lo, hi) = block.split_at_mut(half);
            for k in 0..half {
                let t = hi[k] * twiddles[k * stride];
                hi[k] = lo[k] - t;
                lo[k] += t;
            }
        };
        if n >= 1 << 14 {
            values.par_chunks_mut(2 * half).for_each(butterfly);
        } else {
            values.chunks_mut(2 * half).for_each(butterfly);
        }
        half *= 2;
    }
}

/// Forward or inverse transform of `values` on the domain of its length.
pub fn fft(values: &[Fr], inverse: bool) -> Result<Vec<Fr>, CurveError> {
    let domain = EvaluationDomain::new(values.len())?;
    let mut out = values.to_vec();
    if inverse {
        domain.ifft_in_place(&mut out);
    } else {
        domain.fft_in_place(&mut out);
    }
    Ok(out)
}
