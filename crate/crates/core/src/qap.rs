//! R1CS → QAP. Constraint `i` is pinned to the domain point `ω^i`; the
//! per-variable polynomials are kept in evaluation form (the constraint
//! matrices themselves) and only interpolated when a prover or a divisibility
//! check needs coefficients.

use ark_ff::{Field, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::curve::{CurveError, EvaluationDomain, Fr};
use crate::r1cs::{ConstraintSystem, R1csError, SparseMatrix};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QapError {
    #[error("constraint system has no constraints")]
    NoConstraints,
    #[error(transparent)]
    Domain(#[from] CurveError),
    #[error(transparent)]
    Assignment(#[from] R1csError),
}

#[derive(Clone, Debug)]
pub struct Qap {
    domain: EvaluationDomain,
    num_public: usize,
    num_variables: usize,
    num_constraints: usize,
    a: SparseMatrix,
    b: SparseMatrix,
    c: SparseMatrix,
}

/// Every variable's `A_i(τ)`, `B_i(τ)`, `C_i(τ)` plus `t(τ)`.
#[derive(Clone, Debug)]
pub struct QapAtPoint {
    pub a: Vec<Fr>,
    pub b: Vec<Fr>,
    pub c: Vec<Fr>,
    pub t: Fr,
}

/// Result of dividing `A(x)·B(x) − C(x)` by `t(x)`.
#[derive(Clone, Debug)]
pub struct Division {
    pub quotient: Vec<Fr>,
    pub remainder: Vec<Fr>,
}

impl Division {
    pub fn is_exact(&self) -> bool {
        self.remainder.iter().all(Zero::is_zero)
    }
}

pub fn to_qap(cs: &ConstraintSystem) -> Result<Qap, QapError> {
    Qap::from_system(cs)
}

impl Qap {
    pub fn from_system(cs: &ConstraintSystem) -> Result<Self, QapError> {
        if cs.num_constraints() == 0 {
            return Err(QapError::NoConstraints);
        }
        let domain = EvaluationDomain::for_size(cs.num_constraints())?;
        let (a, b, c) = cs.matrices();
        Ok(Self {
            domain,
            num_public: cs.num_public(),
            num_variables: cs.num_variables(),
            num_constraints: cs.num_constraints(),
            a: a.clone(),
            b: b.clone(),
            c: c.clone(),
        })
    }

    pub fn domain(&self) -> &EvaluationDomain {
        &self.domain
    }

    /// Degree of `t(x)`, i.e. the domain size.
    pub fn degree(&self) -> usize {
        self.domain.size()
    }

    pub fn num_public(&self) -> usize {
        self.num_public
    }

    pub fn num_variables(&self) -> usize {
        self.num_variables
    }

    pub fn num_witness(&self) -> usize {
        self.num_variables - 1 - self.num_public
    }

    pub fn num_constraints(&self) -> usize {
        self.num_constraints
    }

    pub fn target_coefficients(&self) -> Vec<Fr> {
        self.domain.vanishing_coefficients()
    }

    /// Evaluation of variable `var`'s A-, B-, C-polynomials on the domain.
    pub fn variable_evaluations(&self, var: usize) -> [Vec<Fr>; 3] {
        let n = self.domain.size();
        let column = |m: &SparseMatrix| {
            let mut out = vec![Fr::zero(); n];
            for (i, slot) in out.iter_mut().enumerate().take(self.num_constraints) {
                for (col, coeff) in m.row(i) {
                    if col == var {
                        *slot += coeff;
                    }
                }
            }
            out
        };
        [column(&self.a), column(&self.b), column(&self.c)]
    }

    /// All variable polynomials evaluated at `tau` in one pass over the
    /// constraints, via the Lagrange basis. `None` if `tau` lies in the domain.
    pub fn evaluate_at(&self, tau: &Fr) -> Option<QapAtPoint> {
        let lagrange = self.domain.lagrange_at(tau)?;
        let fold = |m: &SparseMatrix| {
            let mut acc = vec![Fr::zero(); self.num_variables];
            for (i, l) in lagrange.iter().enumerate().take(self.num_constraints) {
                for (col, coeff) in m.row(i) {
                    acc[col] += *coeff * l;
                }
            }
            acc
        };
        Some(QapAtPoint {
            a: fold(&self.a),
            b: fold(&self.b),
            c: fold(&self.c),
            t: self.domain.vanishing_at(tau),
        })
    }

    fn check_assignment(&self, z: &[Fr]) -> Result<(), QapError> {
        if z.len() != self.num_variables {
            return Err(R1csError::AssignmentLength {
                expected: self.num_variables,
                actual: z.len(),
            }
            .into());
        }
        Ok(())
    }

    /// `(Σ z_i A_i, Σ z_i B_i, Σ z_i C_i)` on the domain, zero-padded.
    pub fn assignment_evaluations(&self, z: &[Fr]) -> Result<[Vec<Fr>; 3], QapError> {
        self.check_assignment(z)?;
        let n = self.domain.size();
        let pad = |mut v: Vec<Fr>| {
            v.resize(n, Fr::zero());
            v
        };
        Ok([pad(self.a.mul_vec(z)), pad(self.b.mul_vec(z)), pad(self.c.mul_vec(z))])
    }

    /// Coefficients of `h(x) = (A·B − C)/t` computed on the coset `g·H`.
    /// Only meaningful when `z` satisfies the system; the prover's path.
    pub fn quotient(&self, z: &[Fr]) -> Result<Vec<Fr>, QapError> {
        let [mut a, mut b, mut c] = self.assignment_evaluations(z)?;
        let d = &self.domain;
        for v in [&mut a, &mut b, &mut c] {
            d.ifft_in_place(v);
            d.coset_fft_in_place(v);
        }
        let t_inv = d.vanishing_on_coset().inverse().expect("coset avoids the domain");
        let mut h: Vec<Fr> = a
            .iter()
            .zip(&b)
            .zip(&c)
            .map(|((a, b), c)| (*a * b - c) * t_inv)
            .collect();
        d.coset_ifft_in_place(&mut h);
        Ok(h)
    }

    /// Exact polynomial division of `A·B − C` by `t(x)` over a doubled domain.
    /// The remainder is zero iff `z` satisfies every constraint.
    pub fn divide(&self, z: &[Fr]) -> Result<Division, QapError> {
        let [mut a, mut b, mut c] = self.assignment_evaluations(z)?;
        let n = self.domain.size();
        let big = EvaluationDomain::new(2 * n)?;
        for v in [&mut a, &mut b, &mut c] {
            self.domain.ifft_in_place(v);
            v.resize(2 * n, Fr::zero());
            big.fft_in_place(v);
        }
        let mut p: Vec<Fr> = a.iter().zip(&b).zip(&c).map(|((a, b), c)| *a * b - c).collect();
        big.ifft_in_place(&mut p);
        // p = h·(x^n − 1) + r with h_i = p_{n+i}, r_i = p_i + p_{n+i}
        let quotient = p[n..].to_vec();
        let remainder = (0..n).map(|i| p[i] + p[n + i]).collect();
        Ok(Division { quotient, remainder })
    }

    pub fn is_satisfied(&self, z: &[Fr]) -> Result<bool, QapError> {
        Ok(self.divide(z)?.is_exact())
    }

    /// First constraint row violated by `z`.
    pub fn first_unsatisfied(&self, z: &[Fr]) -> Result<Option<usize>, QapError> {
        self.check_assignment(z)?;
        Ok((0..self.num_constraints).into_par_iter().find_first(|&i| {
            self.a.row_dot(i, z) * self.b.row_dot(i, z) != self.c.row_dot(i, z)
        }))
    }

    /// First public input (1-based) that no constraint references.
    pub fn first_unbound_public(&self) -> Option<usize> {
        let mut seen = vec![false; self.num_public + 1];
        for m in [&self.a, &self.b, &self.c] {
            for i in 0..self.num_constraints {
                for (col, _) in m.row(i) {
                    if col <= self.num_public {
                        seen[col] = true;
                    }
                }
            }
        }
        (1..=self.num_public).find(|&i| !seen[i])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::r1cs::{ConstraintSink, LinearCombination, Variable};
    use ark_ff::One;

    fn squaring() -> ConstraintSystem {
        let mut cs = ConstraintSystem::new();
        let y = cs.alloc_public(None).unwrap();
        let x = cs.alloc_witness(None).unwrap();
        cs.enforce(x.into(), x.into(), y.into()).unwrap();
        cs
    }

    #[test]
    fn empty_system_rejected() {
        assert_eq!(to_qap(&ConstraintSystem::new()).unwrap_err(), QapError::NoConstraints);
    }

    #[test]
    fn target_degree_is_domain_size() {
        let mut cs = ConstraintSystem::new();
        let x = cs.alloc_witness(None).unwrap();
        for _ in 0..4 {
            cs.enforce(x.into(), x.into(), x.into()).unwrap();
        }
        let qap = to_qap(&cs).unwrap();
        assert_eq!(qap.degree(), 4);
        let t = qap.target_coefficients();
        assert_eq!(t.len() - 1, 4);
        assert!(t[4].is_one());
    }

    #[test]
    fn squaring_divisibility() {
        let qap = to_qap(&squaring()).unwrap();
        let one = Fr::one();
        assert!(qap.is_satisfied(&[one, Fr::from(25u64), Fr::from(5u64)]).unwrap());
        assert!(!qap.is_satisfied(&[one, Fr::from(24u64), Fr::from(5u64)]).unwrap());
    }

    #[test]
    fn coset_quotient_matches_exact_division() {
        let mut cs = ConstraintSystem::new();
        let out = cs.alloc_public(None).unwrap();
        let x = cs.alloc_witness(None).unwrap();
        let x2 = cs.alloc_witness(None).unwrap();
        let x3 = cs.alloc_witness(None).unwrap();
        cs.enforce(x.into(), x.into(), x2.into()).unwrap();
        cs.enforce(x2.into(), x.into(), x3.into()).unwrap();
        cs.enforce(
            LinearCombination::from(x3) + &LinearCombination::from(x),
            Variable::ONE.into(),
            out.into(),
        )
        .unwrap();
        let qap = to_qap(&cs).unwrap();
        let z: Vec<Fr> = [1u64, 30, 3, 9, 27].iter().map(|v| Fr::from(*v)).collect();
        let exact = qap.divide(&z).unwrap();
        assert!(exact.is_exact());
        let h = qap.quotient(&z).unwrap();
        assert_eq!(&h[..], &exact.quotient[..h.len()]);
        assert!(exact.quotient[h.len()..].iter().all(Zero::is_zero));
    }

    #[test]
    fn evaluate_at_matches_interpolation() {
        let qap = to_qap(&squaring()).unwrap();
        let tau = Fr::from(123456789u64);
        let at = qap.evaluate_at(&tau).unwrap();
        for var in 0..qap.num_variables() {
            let evals = qap.variable_evaluations(var);
            for (which, e) in evals.iter().enumerate() {
                let coeffs = crate::curve::fft(e, true).unwrap();
                let direct = coeffs.iter().rev().fold(Fr::zero(), |acc, c| acc * tau + c);
                let got = [&at.a, &at.b, &at.c][which][var];
                assert_eq!(got, direct);
            }
        }
    }
}
