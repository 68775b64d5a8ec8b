//! The aggregation statement: integer-averaged client vectors, a MiMC7 digest
//! per input vector and for the output, and the digest sum.
//!
//! Public inputs, in order: `H^1..H^m, w_hash, H_sum`.
//! Witness, in order: `e` (client-major, `m·P`), `q` (`P`), `rem` (`P`), then
//! range-check bits and hash internals.

use ark_ff::{AdditiveGroup, One, PrimeField, Zero};
use thiserror::Error;

use crate::curve::{fr_from_u64, Fr};
use crate::mimc::{hash_encoded, mimc7_hash_gadget, pack_lcs, MimcError, MimcParams};
use crate::r1cs::{
    ConstraintCounter, ConstraintSink, ConstraintSystem, LinearCombination, R1csError, Variable,
    WitnessGenerator,
};

/// Bits in the quotient range check.
pub const Q_BITS: usize = 48;
/// Exclusive bound on encoded client values.
pub const E_BOUND: u64 = 1 << 47;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AggError {
    #[error("need at least one client and one parameter (got m={m}, P={p})")]
    EmptyShape { m: usize, p: usize },
    #[error("client {client} vector has {actual} entries, expected {expected}")]
    Shape { client: usize, expected: usize, actual: usize },
    #[error("got {actual} client vectors, circuit built for {expected}")]
    ClientCount { expected: usize, actual: usize },
    #[error("client {client} entry {index} = {value} is not below 2^47")]
    Range { client: usize, index: usize, value: u64 },
    #[error(transparent)]
    Mimc(#[from] MimcError),
    #[error(transparent)]
    R1cs(#[from] R1csError),
}

/// `⌈log₂ m⌉` bits for each remainder range check.
pub fn rem_bits(m: usize) -> usize {
    (usize::BITS - (m.max(1) - 1).leading_zeros()) as usize
}

/// Every value the circuit needs, computed natively.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AggValues {
    pub encoded: Vec<Vec<u64>>,
    pub quotient: Vec<u64>,
    pub remainder: Vec<u64>,
    pub client_hashes: Vec<Fr>,
    pub w_hash: Fr,
    pub h_sum: Fr,
}

impl AggValues {
    /// Public inputs in canonical order.
    pub fn public_inputs(&self) -> Vec<Fr> {
        let mut out = self.client_hashes.clone();
        out.push(self.w_hash);
        out.push(self.h_sum);
        out
    }
}

/// Full assignment split the way the prover wants it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AggWitness {
    pub values: AggValues,
    pub public: Vec<Fr>,
    pub witness: Vec<Fr>,
}

#[derive(Clone, Debug)]
pub struct AggCircuit {
    m: usize,
    p: usize,
    params: MimcParams,
}

impl AggCircuit {
    pub fn new(m: usize, p: usize, params: MimcParams) -> Result<Self, AggError> {
        if m == 0 || p == 0 {
            return Err(AggError::EmptyShape { m, p });
        }
        Ok(Self { m, p, params })
    }

    pub fn clients(&self) -> usize {
        self.m
    }

    pub fn params_len(&self) -> usize {
        self.p
    }

    pub fn mimc(&self) -> &MimcParams {
        &self.params
    }

    pub fn num_public(&self) -> usize {
        self.m + 2
    }

    /// Topology only; no values are attached.
    pub fn build(&self) -> Result<ConstraintSystem, AggError> {
        let mut cs = ConstraintSystem::new();
        self.synthesize(&mut cs, None)?;
        Ok(cs)
    }

    pub fn constraint_count(&self) -> Result<usize, AggError> {
        let mut counter = ConstraintCounter::new();
        self.synthesize(&mut counter, None)?;
        Ok(counter.num_constraints())
    }

    /// Integer average, remainders and every digest, computed natively.
    pub fn compute_values(&self, encoded: &[Vec<u64>]) -> Result<AggValues, AggError> {
        if encoded.len() != self.m {
            return Err(AggError::ClientCount { expected: self.m, actual: encoded.len() });
        }
        for (client, e) in encoded.iter().enumerate() {
            if e.len() != self.p {
                return Err(AggError::Shape { client, expected: self.p, actual: e.len() });
            }
            if let Some(index) = e.iter().position(|&v| v >= E_BOUND) {
                return Err(AggError::Range { client, index, value: e[index] });
            }
        }
        let m = self.m as u128;
        let (quotient, remainder): (Vec<u64>, Vec<u64>) = (0..self.p)
            .map(|j| {
                let sum: u128 = encoded.iter().map(|e| e[j] as u128).sum();
                ((sum / m) as u64, (sum % m) as u64)
            })
            .unzip();
        let client_hashes = encoded
            .iter()
            .map(|e| hash_encoded(e, &self.params))
            .collect::<Result<Vec<_>, _>>()?;
        let w_hash = hash_encoded(&quotient, &self.params)?;
        let h_sum = client_hashes.iter().sum();
        Ok(AggValues { encoded: encoded.to_vec(), quotient, remainder, client_hashes, w_hash, h_sum })
    }

    pub fn assign_witness(&self, encoded: &[Vec<u64>]) -> Result<AggWitness, AggError> {
        let values = self.compute_values(encoded)?;
        self.assign_values(values)
    }

    /// Runs the synthesis with `values` as given, consistent or not.
    pub fn assign_values(&self, values: AggValues) -> Result<AggWitness, AggError> {
        let mut gen = WitnessGenerator::new();
        self.synthesize(&mut gen, Some(&values))?;
        let (public, witness) = gen.into_parts();
        Ok(AggWitness { values, public, witness })
    }

    fn synthesize<CS: ConstraintSink>(
        &self,
        cs: &mut CS,
        values: Option<&AggValues>,
    ) -> Result<(), AggError> {
        let (m, p) = (self.m, self.p);
        let val = |f: &dyn Fn(&AggValues) -> Fr| values.map(f);

        let h: Vec<Variable> = (0..m)
            .map(|k| cs.alloc_public(val(&|v| v.client_hashes[k])))
            .collect::<Result<_, _>>()?;
        let w_hash = cs.alloc_public(val(&|v| v.w_hash))?;
        let h_sum = cs.alloc_public(val(&|v| v.h_sum))?;

        let e: Vec<Vec<Variable>> = (0..m)
            .map(|k| {
                (0..p)
                    .map(|j| cs.alloc_witness(val(&|v| fr_from_u64(v.encoded[k][j]))))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<_, _>>()?;
        let q: Vec<Variable> = (0..p)
            .map(|j| cs.alloc_witness(val(&|v| fr_from_u64(v.quotient[j]))))
            .collect::<Result<_, _>>()?;
        let rem: Vec<Variable> = (0..p)
            .map(|j| cs.alloc_witness(val(&|v| fr_from_u64(v.remainder[j]))))
            .collect::<Result<_, _>>()?;

        let b = rem_bits(m);
        let m_fr = fr_from_u64(m as u64);
        let top = LinearCombination::constant(fr_from_u64(m as u64 - 1));
        for j in 0..p {
            // Σ_k e_kj = m·q_j + rem_j
            let sum = e.iter().fold(LinearCombination::zero(), |acc, ek| acc.with(ek[j], Fr::one()));
            let rhs = LinearCombination::from(q[j]).scale(m_fr) + &rem[j].into();
            cs.enforce_equal(&sum, &rhs)?;

            let qv = cs.eval(&q[j].into());
            enforce_bits(cs, &q[j].into(), qv, Q_BITS)?;
            let rv = cs.eval(&rem[j].into());
            enforce_bits(cs, &rem[j].into(), rv, b)?;
            let slack = top.clone() - &rem[j].into();
            let sv = cs.eval(&slack);
            enforce_bits(cs, &slack, sv, b)?;
        }

        for (k, ek) in e.iter().enumerate() {
            let d = mimc7_hash_gadget(cs, &pack_lcs(ek), &self.params)?;
            cs.enforce_equal(&d.into(), &h[k].into())?;
        }
        let d = mimc7_hash_gadget(cs, &pack_lcs(&q), &self.params)?;
        cs.enforce_equal(&d.into(), &w_hash.into())?;

        let total = h.iter().fold(LinearCombination::zero(), |acc, hk| acc.with(*hk, Fr::one()));
        cs.enforce_equal(&total, &h_sum.into())?;
        Ok(())
    }
}

/// Constrains `target` to `Σ 2^i · bit_i` over `n` boolean witnesses:
/// `n` booleanity rows plus one recomposition row.
fn enforce_bits<CS: ConstraintSink>(
    cs: &mut CS,
    target: &LinearCombination,
    value: Option<Fr>,
    n: usize,
) -> Result<(), AggError> {
    // Values beyond the bit width get truncated here; the recomposition row
    // then fails, which is the point.
    let limbs = value.map(|v| v.into_bigint().0);
    let mut acc = LinearCombination::zero();
    let mut coeff = Fr::one();
    for i in 0..n {
        let bit = limbs.map(|l| if (l[i / 64] >> (i % 64)) & 1 == 1 { Fr::one() } else { Fr::zero() });
        let v = cs.alloc_witness(bit)?;
        cs.enforce(
            v.into(),
            LinearCombination::constant(Fr::one()) - &v.into(),
            LinearCombination::zero(),
        )?;
        acc.add_term(v, coeff);
        coeff.double_in_place();
    }
    cs.enforce_equal(&acc, target)?;
    Ok(())
}

pub fn build_circuit(m: usize, p: usize, params: &MimcParams) -> Result<ConstraintSystem, AggError> {
    AggCircuit::new(m, p, params.clone())?.build()
}

pub fn constraint_count(m: usize, p: usize, params: &MimcParams) -> Result<usize, AggError> {
    AggCircuit::new(m, p, params.clone())?.constraint_count()
}

pub fn assign_witness(encoded: &[Vec<u64>], params: &MimcParams) -> Result<AggWitness, AggError> {
    let p = encoded.first().map_or(0, Vec::len);
    AggCircuit::new(encoded.len(), p, params.clone())?.assign_witness(encoded)
}

#[cfg(test)]
mod tests;
