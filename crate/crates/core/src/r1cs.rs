//! Rank-1 constraint systems: variables, linear combinations, and the three
//! sinks gadgets synthesize into (full system, witness-only, counting-only).
//!
//! Variable layout is fixed: index 0 is the constant one, public inputs form a
//! contiguous prefix after it, private witnesses follow.

use std::ops::{Add, Neg, Sub};

use ark_ff::{One, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::curve::Fr;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum R1csError {
    #[error("public input allocated after the first private witness")]
    PublicAfterWitness,
    #[error("the constant-one variable is implicit and cannot be allocated")]
    ConstantAlloc,
    #[error("variable {0} is not allocated in this system")]
    Unallocated(usize),
    #[error("assignment has {actual} entries, expected {expected}")]
    AssignmentLength { expected: usize, actual: usize },
    #[error("assignment[0] must be the constant 1")]
    BadConstant,
    #[error("no value supplied for variable {0}")]
    MissingValue(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKind {
    One,
    Public,
    Witness,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Variable {
    index: usize,
    kind: VarKind,
}

impl Variable {
    pub const ONE: Variable = Variable { index: 0, kind: VarKind::One };

    pub fn index(self) -> usize {
        self.index
    }

    pub fn kind(self) -> VarKind {
        self.kind
    }
}

/// Sparse `Σ coeff · var`, kept sorted by variable index with no duplicates
/// and no zero coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LinearCombination(Vec<(Variable, Fr)>);

impl LinearCombination {
    pub fn zero() -> Self {
        Self(Vec::new())
    }

    pub fn constant(c: Fr) -> Self {
        Self::zero().with(Variable::ONE, c)
    }

    pub fn terms(&self) -> &[(Variable, Fr)] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Adds `coeff · var`, merging with an existing entry.
    pub fn with(mut self, var: Variable, coeff: Fr) -> Self {
        self.add_term(var, coeff);
        self
    }

    pub fn add_term(&mut self, var: Variable, coeff: Fr) {
        if coeff.is_zero() {
            return;
        }
        match self.0.binary_search_by_key(&var.index, |(v, _)| v.index) {
            Ok(pos) => {
                self.0[pos].1 += coeff;
                if self.0[pos].1.is_zero() {
                    self.0.remove(pos);
                }
            }
            Err(pos) => self.0.insert(pos, (var, coeff)),
        }
    }

    pub fn scale(mut self, k: Fr) -> Self {
        if k.is_zero() {
            return Self::zero();
        }
        for (_, c) in &mut self.0 {
            *c *= k;
        }
        self
    }

    pub fn max_index(&self) -> Option<usize> {
        self.0.last().map(|(v, _)| v.index)
    }

    /// Evaluates against a full assignment `[1, public…, witness…]`.
    pub fn evaluate(&self, assignment: &[Fr]) -> Fr {
        self.0.iter().map(|(v, c)| assignment[v.index] * c).sum()
    }
}

impl From<Variable> for LinearCombination {
    fn from(v: Variable) -> Self {
        Self::zero().with(v, Fr::one())
    }
}

impl Add<&LinearCombination> for LinearCombination {
    type Output = LinearCombination;
    fn add(mut self, rhs: &LinearCombination) -> Self {
        for (v, c) in &rhs.0 {
            self.add_term(*v, *c);
        }
        self
    }
}

impl Sub<&LinearCombination> for LinearCombination {
    type Output = LinearCombination;
    fn sub(mut self, rhs: &LinearCombination) -> Self {
        for (v, c) in &rhs.0 {
            self.add_term(*v, -*c);
        }
        self
    }
}

impl Neg for LinearCombination {
    type Output = LinearCombination;
    fn neg(self) -> Self {
        self.scale(-Fr::one())
    }
}

/// Anything gadgets can synthesize into.
pub trait ConstraintSink {
    fn alloc(&mut self, kind: VarKind, value: Option<Fr>) -> Result<Variable, R1csError>;

    /// Appends the row `⟨a,z⟩ · ⟨b,z⟩ = ⟨c,z⟩`.
    fn enforce(
        &mut self,
        a: LinearCombination,
        b: LinearCombination,
        c: LinearCombination,
    ) -> Result<(), R1csError>;

    /// Value of `lc` if every referenced variable has a known value.
    fn eval(&self, lc: &LinearCombination) -> Option<Fr>;

    fn alloc_public(&mut self, value: Option<Fr>) -> Result<Variable, R1csError> {
        self.alloc(VarKind::Public, value)
    }

    fn alloc_witness(&mut self, value: Option<Fr>) -> Result<Variable, R1csError> {
        self.alloc(VarKind::Witness, value)
    }

    /// `lhs = rhs` as the single row `(lhs - rhs) · 1 = 0`.
    fn enforce_equal(
        &mut self,
        lhs: &LinearCombination,
        rhs: &LinearCombination,
    ) -> Result<(), R1csError> {
        self.enforce(lhs.clone() - rhs, Variable::ONE.into(), LinearCombination::zero())
    }
}

/// Shared allocation bookkeeping for the three sinks.
#[derive(Clone, Debug, Default)]
struct Allocator {
    num_public: usize,
    num_witness: usize,
}

impl Allocator {
    fn next(&mut self, kind: VarKind) -> Result<Variable, R1csError> {
        match kind {
            VarKind::One => Err(R1csError::ConstantAlloc),
            VarKind::Public => {
                if self.num_witness > 0 {
                    return Err(R1csError::PublicAfterWitness);
                }
                self.num_public += 1;
                Ok(Variable { index: self.num_public, kind })
            }
            VarKind::Witness => {
                self.num_witness += 1;
                Ok(Variable { index: self.num_public + self.num_witness, kind })
            }
        }
    }

    fn num_variables(&self) -> usize {
        1 + self.num_public + self.num_witness
    }

    fn check(&self, lcs: [&LinearCombination; 3]) -> Result<(), R1csError> {
        for lc in lcs {
            if let Some(max) = lc.max_index() {
                if max >= self.num_variables() {
                    return Err(R1csError::Unallocated(max));
                }
            }
        }
        Ok(())
    }
}

/// Row-compressed sparse matrix; row `i` is constraint `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMatrix {
    row_starts: Vec<usize>,
    cols: Vec<u32>,
    coeffs: Vec<Fr>,
}

impl Default for SparseMatrix {
    fn default() -> Self {
        Self { row_starts: vec![0], cols: Vec::new(), coeffs: Vec::new() }
    }
}

impl SparseMatrix {
    fn push_row(&mut self, lc: &LinearCombination) {
        for (v, c) in lc.terms() {
            self.cols.push(v.index as u32);
            self.coeffs.push(*c);
        }
        self.row_starts.push(self.cols.len());
    }

    pub fn num_rows(&self) -> usize {
        self.row_starts.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, &Fr)> + '_ {
        let range = self.row_starts[i]..self.row_starts[i + 1];
        self.cols[range.clone()].iter().map(|c| *c as usize).zip(&self.coeffs[range])
    }

    pub fn row_dot(&self, i: usize, z: &[Fr]) -> Fr {
        self.row(i).map(|(col, c)| z[col] * c).sum()
    }

    /// `M · z`, one entry per row.
    pub fn mul_vec(&self, z: &[Fr]) -> Vec<Fr> {
        (0..self.num_rows()).into_par_iter().map(|i| self.row_dot(i, z)).collect()
    }
}

/// The full system: topology plus whatever values were supplied as hints.
#[derive(Clone, Debug)]
pub struct ConstraintSystem {
    alloc: Allocator,
    a: SparseMatrix,
    b: SparseMatrix,
    c: SparseMatrix,
    values: Vec<Option<Fr>>,
}

impl Default for ConstraintSystem {
    fn default() -> Self {
        Self::new()
    }
}

impl ConstraintSystem {
    pub fn new() -> Self {
        Self {
            alloc: Allocator::default(),
            a: SparseMatrix::default(),
            b: SparseMatrix::default(),
            c: SparseMatrix::default(),
            values: vec![Some(Fr::one())],
        }
    }

    pub fn num_public(&self) -> usize {
        self.alloc.num_public
    }

    pub fn num_witness(&self) -> usize {
        self.alloc.num_witness
    }

    pub fn num_variables(&self) -> usize {
        self.alloc.num_variables()
    }

    pub fn num_constraints(&self) -> usize {
        self.a.num_rows()
    }

    pub fn matrices(&self) -> (&SparseMatrix, &SparseMatrix, &SparseMatrix) {
        (&self.a, &self.b, &self.c)
    }

    /// The full assignment, if every variable was allocated with a value.
    pub fn assignment(&self) -> Option<Vec<Fr>> {
        self.values.iter().copied().collect()
    }

    fn check_assignment(&self, z: &[Fr]) -> Result<(), R1csError> {
        if z.len() != self.num_variables() {
            return Err(R1csError::AssignmentLength {
                expected: self.num_variables(),
                actual: z.len(),
            });
        }
        if !z[0].is_one() {
            return Err(R1csError::BadConstant);
        }
        Ok(())
    }

    /// Index of the first row that `z` violates.
    pub fn first_unsatisfied(&self, z: &[Fr]) -> Result<Option<usize>, R1csError> {
        self.check_assignment(z)?;
        Ok((0..self.num_constraints()).into_par_iter().find_first(|&i| {
            self.a.row_dot(i, z) * self.b.row_dot(i, z) != self.c.row_dot(i, z)
        }))
    }

    pub fn is_satisfied(&self, z: &[Fr]) -> Result<bool, R1csError> {
        Ok(self.first_unsatisfied(z)?.is_none())
    }

    /// Splits a full assignment into `(public, witness)`.
    pub fn split_assignment(&self, z: &[Fr]) -> Result<(Vec<Fr>, Vec<Fr>), R1csError> {
        self.check_assignment(z)?;
        let np = self.num_public();
        Ok((z[1..=np].to_vec(), z[np + 1..].to_vec()))
    }

    /// Reassembles `[1, public…, witness…]`.
    pub fn full_assignment(&self, public: &[Fr], witness: &[Fr]) -> Result<Vec<Fr>, R1csError> {
        if public.len() != self.num_public() || witness.len() != self.num_witness() {
            return Err(R1csError::AssignmentLength {
                expected: self.num_public() + self.num_witness(),
                actual: public.len() + witness.len(),
            });
        }
        let mut z = Vec::with_capacity(self.num_variables());
        z.push(Fr::one());
        z.extend_from_slice(public);
        z.extend_from_slice(witness);
        Ok(z)
    }
}

impl ConstraintSink for ConstraintSystem {
    fn alloc(&mut self, kind: VarKind, value: Option<Fr>) -> Result<Variable, R1csError> {
        let v = self.alloc.next(kind)?;
        self.values.push(value);
        Ok(v)
    }

    fn enforce(
        &mut self,
        a: LinearCombination,
        b: LinearCombination,
        c: LinearCombination,
    ) -> Result<(), R1csError> {
        self.alloc.check([&a, &b, &c])?;
        self.a.push_row(&a);
        self.b.push_row(&b);
        self.c.push_row(&c);
        Ok(())
    }

    fn eval(&self, lc: &LinearCombination) -> Option<Fr> {
        lc.terms()
            .iter()
            .map(|(v, c)| self.values.get(v.index).copied().flatten().map(|x| x * c))
            .sum()
    }
}

/// Records values only; constraints are discarded. Used to assign a witness
/// against a topology that was built once and cached.
#[derive(Clone, Debug)]
pub struct WitnessGenerator {
    alloc: Allocator,
    values: Vec<Fr>,
}

impl Default for WitnessGenerator {
    fn default() -> Self {
        Self::new()
    }
}

impl WitnessGenerator {
    pub fn new() -> Self {
        Self { alloc: Allocator::default(), values: vec![Fr::one()] }
    }

    pub fn num_public(&self) -> usize {
        self.alloc.num_public
    }

    pub fn into_assignment(self) -> Vec<Fr> {
        self.values
    }

    /// `(public, witness)` without the leading constant.
    pub fn into_parts(self) -> (Vec<Fr>, Vec<Fr>) {
        let np = self.alloc.num_public;
        let mut values = self.values;
        let witness = values.split_off(np + 1);
        values.remove(0);
        (values, witness)
    }
}

impl ConstraintSink for WitnessGenerator {
    fn alloc(&mut self, kind: VarKind, value: Option<Fr>) -> Result<Variable, R1csError> {
        let v = self.alloc.next(kind)?;
        self.values.push(value.ok_or(R1csError::MissingValue(v.index))?);
        Ok(v)
    }

    fn enforce(
        &mut self,
        a: LinearCombination,
        b: LinearCombination,
        c: LinearCombination,
    ) -> Result<(), R1csError> {
        self.alloc.check([&a, &b, &c])
    }

    fn eval(&self, lc: &LinearCombination) -> Option<Fr> {
        Some(lc.evaluate(&self.values))
    }
}

/// Counts variables and rows without storing anything.
#[derive(Clone, Debug, Default)]
pub struct ConstraintCounter {
    alloc: Allocator,
    num_constraints: usize,
}

impl ConstraintCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_constraints(&self) -> usize {
        self.num_constraints
    }

    pub fn num_public(&self) -> usize {
        self.alloc.num_public
    }

    pub fn num_witness(&self) -> usize {
        self.alloc.num_witness
    }
}

impl ConstraintSink for ConstraintCounter {
    fn alloc(&mut self, kind: VarKind, _value: Option<Fr>) -> Result<Variable, R1csError> {
        self.alloc.next(kind)
    }

    fn enforce(
        &mut self,
        a: LinearCombination,
        b: LinearCombination,
        c: LinearCombination,
    ) -> Result<(), R1csError> {
        self.alloc.check([&a, &b, &c])?;
        self.num_constraints += 1;
        Ok(())
    }

    fn eval(&self, _lc: &LinearCombination) -> Option<Fr> {
        None
    }
}
