//! Fixtures and independent oracles shared by the integration targets.
#![allow(dead_code)]

use ark_ff::{Field, One, Zero};
use rand::Rng;
use rand_chacha::ChaCha20Rng;
use zkdfl::curve::{random_fr, Fr};
use zkdfl::r1cs::{ConstraintSink, ConstraintSystem, LinearCombination, Variable};

/// Forward-evaluated random system with 1–3 public inputs, all bound in the
/// first row. Returns the system and a satisfying assignment.
pub fn random_system(rng: &mut ChaCha20Rng, rows: usize) -> (ConstraintSystem, Vec<Fr>) {
    let mut cs = ConstraintSystem::new();
    let mut vars = vec![Variable::ONE];
    for _ in 0..rng.gen_range(1..4) {
        vars.push(cs.alloc_public(Some(random_fr(rng))).unwrap());
    }
    let public_lc = vars[1..].iter().fold(LinearCombination::zero(), |acc, v| acc.with(*v, random_fr(rng)));
    for row in 0..rows {
        let pick = |rng: &mut ChaCha20Rng, vars: &[Variable]| {
            let mut lc = LinearCombination::zero();
            for _ in 0..rng.gen_range(1..4) {
                lc.add_term(vars[rng.gen_range(0..vars.len())], random_fr(rng));
            }
            lc
        };
        let mut a = pick(rng, &vars);
        if row == 0 {
            a = a + &public_lc;
        }
        let b = pick(rng, &vars);
        let value = cs.eval(&a).unwrap() * cs.eval(&b).unwrap();
        let out = cs.alloc_witness(Some(value)).unwrap();
        cs.enforce(a, b, out.into()).unwrap();
        vars.push(out);
    }
    let z = cs.assignment().unwrap();
    (cs, z)
}

// Naive dense polynomials, lowest degree first.

pub fn poly_mul(a: &[Fr], b: &[Fr]) -> Vec<Fr> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Fr::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += *x * y;
        }
    }
    out
}

pub fn poly_sub(a: &[Fr], b: &[Fr]) -> Vec<Fr> {
    let mut out = vec![Fr::zero(); a.len().max(b.len())];
    a.iter().enumerate().for_each(|(i, x)| out[i] += x);
    b.iter().enumerate().for_each(|(i, x)| out[i] -= x);
    out
}

/// Lagrange interpolation through `(xs[i], ys[i])`, O(n²) per basis term.
pub fn interpolate(xs: &[Fr], ys: &[Fr]) -> Vec<Fr> {
    let mut out = vec![Fr::zero(); xs.len()];
    for (i, (xi, yi)) in xs.iter().zip(ys).enumerate() {
        if yi.is_zero() {
            continue;
        }
        let mut basis = vec![Fr::one()];
        let mut denom = Fr::one();
        for (j, xj) in xs.iter().enumerate() {
            if i != j {
                basis = poly_mul(&basis, &[-*xj, Fr::one()]);
                denom *= *xi - xj;
            }
        }
        let scale = *yi * denom.inverse().unwrap();
        for (o, b) in out.iter_mut().zip(&basis) {
            *o += scale * b;
        }
    }
    out
}

/// Long division by a monic divisor: `(quotient, remainder)`.
pub fn poly_divmod(num: &[Fr], den: &[Fr]) -> (Vec<Fr>, Vec<Fr>) {
    let d = den.len() - 1;
    assert!(den[d].is_one());
    let mut rem = num.to_vec();
    if rem.len() <= d {
        return (Vec::new(), rem);
    }
    let mut q = vec![Fr::zero(); rem.len() - d];
    for k in (0..q.len()).rev() {
        let c = rem[k + d];
        q[k] = c;
        for (j, dj) in den.iter().enumerate() {
            rem[k + j] -= c * dj;
        }
    }
    rem.truncate(d);
    (q, rem)
}

pub fn is_zero_poly(p: &[Fr]) -> bool {
    p.iter().all(Zero::is_zero)
}
