//! Binary-quadratic model representations and conversions.
//!
//! Three forms appear throughout the crate:
//!
//! ```text
//! QUBO:   min  offset + Σ m_i x_i + Σ_{i<j} Q_ij x_i x_j      x ∈ {0,1}
//! Ising:  min  offset + Σ h_i y_i + Σ_{i<j} J_ij y_i y_j      y ∈ {-1,+1}
//! CQM:    min  quadratic objective  s.t. quadratic ==/<= constraints
//! ```
//!
//! QUBO and Ising are equivalent under `x = (1 + y) / 2`; a constrained
//! model compiles down to a QUBO by squared-violation penalties with
//! binary-expanded slack for inequalities.

mod builders;
mod cqm;
mod penalty;
mod textfmt;

pub use builders::{
    build_discretized_ucqubo, build_master_cqm, build_master_qubo, decode_discretized,
    default_discretized_weights, default_master_weights, DiscretizedEncoding, DiscretizedMap,
    MasterMap,
};
pub use cqm::{ConstrainedQuadraticModel, CqmConstraint, QuadExpr, Sense, VarDomain};
pub use penalty::{compile_penalties, CompileInfo, PenaltyMap};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Penalty coefficients A..F used by the unit-commitment QUBO builders.
/// The discretized formulation uses all six; the decomposed master uses
/// A, B, C for its structural constraints and D for optimality cuts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyWeights {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
}

impl PenaltyWeights {
    pub fn uniform(w: f64) -> Self {
        PenaltyWeights {
            a: w,
            b: w,
            c: w,
            d: w,
            e: w,
            f: w,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.a, self.b, self.c, self.d, self.e, self.f];
        if all.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::invalid("penalty weights must be nonnegative"));
        }
        Ok(())
    }
}

/// Quadratic unconstrained binary optimization model with dense variable ids
/// `0..num_vars`. Quadratic keys are unordered pairs stored as `(lo, hi)`
/// with `lo < hi`; self-pairs fold into the linear term since `x² = x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Qubo {
    num_vars: usize,
    linear: Vec<f64>,
    quadratic: BTreeMap<(u32, u32), f64>,
    offset: f64,
}

impl Qubo {
    pub fn new(num_vars: usize) -> Self {
        Qubo {
            num_vars,
            linear: vec![0.0; num_vars],
            quadratic: BTreeMap::new(),
            offset: 0.0,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn add_offset(&mut self, v: f64) {
        self.offset += v;
    }

    /// Append a fresh variable and return its id.
    pub fn push_var(&mut self) -> usize {
        self.linear.push(0.0);
        self.num_vars += 1;
        self.num_vars - 1
    }

    pub fn add_linear(&mut self, i: usize, coeff: f64) {
        self.linear[i] += coeff;
    }

    /// Accumulate a quadratic coefficient; `i == j` folds into the linear
    /// term.
    pub fn add_quadratic(&mut self, i: usize, j: usize, coeff: f64) {
        assert!(i < self.num_vars && j < self.num_vars);
        if i == j {
            self.linear[i] += coeff;
            return;
        }
        let key = (i.min(j) as u32, i.max(j) as u32);
        let slot = self.quadratic.entry(key).or_insert(0.0);
        *slot += coeff;
        if *slot == 0.0 {
            self.quadratic.remove(&key);
        }
    }

    pub fn linear(&self) -> &[f64] {
        &self.linear
    }

    pub fn quadratic(&self) -> &BTreeMap<(u32, u32), f64> {
        &self.quadratic
    }

    /// Energy of a 0/1 assignment.
    pub fn energy(&self, assignment: &[u8]) -> Result<f64> {
        if assignment.len() != self.num_vars {
            return Err(Error::invalid(format!(
                "assignment has {} entries for {} variables",
                assignment.len(),
                self.num_vars
            )));
        }
        let mut e = self.offset;
        for (i, &m) in self.linear.iter().enumerate() {
            if assignment[i] != 0 {
                e += m;
            }
        }
        for (&(i, j), &q) in &self.quadratic {
            if assignment[i as usize] != 0 && assignment[j as usize] != 0 {
                e += q;
            }
        }
        Ok(e)
    }

    /// Largest absolute coefficient (linear or quadratic), 0 for an empty
    /// model. Used for penalty-weight heuristics.
    pub fn max_abs_coeff(&self) -> f64 {
        let lin = self.linear.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        let quad = self.quadratic.values().fold(0.0f64, |m, c| m.max(c.abs()));
        lin.max(quad)
    }

    /// Adjacency in CSR form: `(offsets, neighbor ids, coefficients)`.
    /// Required by the samplers for incremental energy updates.
    pub fn adjacency(&self) -> (Vec<usize>, Vec<u32>, Vec<f64>) {
        let mut deg = vec![0usize; self.num_vars];
        for &(i, j) in self.quadratic.keys() {
            deg[i as usize] += 1;
            deg[j as usize] += 1;
        }
        let mut offsets = vec![0usize; self.num_vars + 1];
        for i in 0..self.num_vars {
            offsets[i + 1] = offsets[i] + deg[i];
        }
        let mut ids = vec![0u32; offsets[self.num_vars]];
        let mut coeffs = vec![0.0f64; offsets[self.num_vars]];
        let mut cursor = offsets.clone();
        for (&(i, j), &q) in &self.quadratic {
            ids[cursor[i as usize]] = j;
            coeffs[cursor[i as usize]] = q;
            cursor[i as usize] += 1;
            ids[cursor[j as usize]] = i;
            coeffs[cursor[j as usize]] = q;
            cursor[j as usize] += 1;
        }
        (offsets, ids, coeffs)
    }

    pub fn to_text(&self) -> String {
        textfmt::write_qubo(self)
    }

    pub fn from_text(text: &str) -> Result<Qubo> {
        textfmt::read_qubo(text)
    }
}

/// Ising model over spins `y ∈ {-1, +1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsingModel {
    num_spins: usize,
    fields: Vec<f64>,
    couplings: BTreeMap<(u32, u32), f64>,
    offset: f64,
}

impl IsingModel {
    pub fn new(num_spins: usize) -> Self {
        IsingModel {
            num_spins,
            fields: vec![0.0; num_spins],
            couplings: BTreeMap::new(),
            offset: 0.0,
        }
    }

    pub fn num_spins(&self) -> usize {
        self.num_spins
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    pub fn couplings(&self) -> &BTreeMap<(u32, u32), f64> {
        &self.couplings
    }

    pub fn add_field(&mut self, i: usize, h: f64) {
        self.fields[i] += h;
    }

    pub fn add_coupling(&mut self, i: usize, j: usize, coeff: f64) {
        assert!(i != j, "self-couplings are constant for spins; fold into offset");
        let key = (i.min(j) as u32, i.max(j) as u32);
        let slot = self.couplings.entry(key).or_insert(0.0);
        *slot += coeff;
        if *slot == 0.0 {
            self.couplings.remove(&key);
        }
    }

    /// Energy of a ±1 spin assignment.
    pub fn energy(&self, spins: &[i8]) -> Result<f64> {
        if spins.len() != self.num_spins {
            return Err(Error::invalid(format!(
                "spin vector has {} entries for {} spins",
                spins.len(),
                self.num_spins
            )));
        }
        if spins.iter().any(|s| *s != 1 && *s != -1) {
            return Err(Error::invalid("spins must be +1 or -1"));
        }
        let mut e = self.offset;
        for (i, &h) in self.fields.iter().enumerate() {
            e += h * spins[i] as f64;
        }
        for (&(i, j), &cj) in &self.couplings {
            e += cj * (spins[i as usize] as f64) * (spins[j as usize] as f64);
        }
        Ok(e)
    }
}

/// QUBO → Ising under `x_i = (1 + y_i)/2`. Energies agree for corresponding
/// assignments.
pub fn to_ising(q: &Qubo) -> IsingModel {
    let mut m = IsingModel::new(q.num_vars());
    m.offset = q.offset;
    for (i, &c) in q.linear.iter().enumerate() {
        // c·x = c/2 + (c/2)·y
        m.offset += 0.5 * c;
        m.fields[i] += 0.5 * c;
    }
    for (&(i, j), &c) in &q.quadratic {
        // c·x_i·x_j = c/4 (1 + y_i + y_j + y_i y_j)
        m.offset += 0.25 * c;
        m.fields[i as usize] += 0.25 * c;
        m.fields[j as usize] += 0.25 * c;
        m.add_coupling(i as usize, j as usize, 0.25 * c);
    }
    m
}

/// Ising → QUBO under `y_i = 2 x_i - 1`; inverse of [`to_ising`].
pub fn to_qubo(m: &IsingModel) -> Qubo {
    let mut q = Qubo::new(m.num_spins());
    q.offset = m.offset;
    for (i, &h) in m.fields.iter().enumerate() {
        // h·y = 2h·x - h
        q.offset -= h;
        q.linear[i] += 2.0 * h;
    }
    for (&(i, j), &c) in &m.couplings {
        // c·y_i·y_j = c (4 x_i x_j - 2 x_i - 2 x_j + 1)
        q.offset += c;
        q.linear[i as usize] -= 2.0 * c;
        q.linear[j as usize] -= 2.0 * c;
        q.add_quadratic(i as usize, j as usize, 4.0 * c);
    }
    q
}

/// Map a QUBO assignment to the corresponding spins, `y = 2x - 1`.
pub fn assignment_to_spins(assignment: &[u8]) -> Vec<i8> {
    assignment.iter().map(|&x| if x != 0 { 1 } else { -1 }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;

    fn random_qubo(n: usize, rng: &mut impl Rng) -> Qubo {
        let mut q = Qubo::new(n);
        q.add_offset(rng.random_range(-2.0..2.0));
        for i in 0..n {
            q.add_linear(i, rng.random_range(-3.0..3.0));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.random_bool(0.5) {
                    q.add_quadratic(i, j, rng.random_range(-3.0..3.0));
                }
            }
        }
        q
    }

    /// Independent term-by-term evaluator used as the oracle for `energy`.
    fn brute_energy(q: &Qubo, x: &[u8]) -> f64 {
        let mut e = q.offset();
        for i in 0..q.num_vars() {
            e += q.linear()[i] * x[i] as f64;
            for j in (i + 1)..q.num_vars() {
                let c = q
                    .quadratic()
                    .get(&(i as u32, j as u32))
                    .copied()
                    .unwrap_or(0.0);
                e += c * (x[i] as f64) * (x[j] as f64);
            }
        }
        e
    }

    fn bits(v: usize, n: usize) -> Vec<u8> {
        (0..n).map(|i| ((v >> i) & 1) as u8).collect()
    }

    #[test]
    fn empty_model_energy_is_offset() {
        let mut q = Qubo::new(3);
        q.add_offset(4.25);
        assert_eq!(q.energy(&[0, 1, 0]).unwrap(), 4.25);
    }

    #[test]
    fn hand_arithmetic_energy() {
        let mut q = Qubo::new(2);
        q.add_linear(0, 2.0);
        q.add_quadratic(0, 1, -3.0);
        assert_eq!(q.energy(&[1, 1]).unwrap(), -1.0);
        assert_eq!(q.energy(&[1, 0]).unwrap(), 2.0);
        assert_eq!(q.energy(&[0, 1]).unwrap(), 0.0);
    }

    #[test]
    fn energy_matches_brute_force_on_random_models() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let q = random_qubo(8, &mut rng);
            for v in 0..256usize {
                let x = bits(v, 8);
                let fast = q.energy(&x).unwrap();
                let slow = brute_energy(&q, &x);
                assert!((fast - slow).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn energy_rejects_wrong_length() {
        let q = Qubo::new(3);
        assert!(q.energy(&[0, 1]).is_err());
    }

    #[test]
    fn self_pair_folds_into_linear() {
        let mut q = Qubo::new(2);
        q.add_quadratic(1, 1, 5.0);
        assert_eq!(q.linear()[1], 5.0);
        assert!(q.quadratic().is_empty());
    }

    #[test]
    fn single_variable_conversion() {
        let mut q = Qubo::new(1);
        q.add_linear(0, 1.0);
        let m = to_ising(&q);
        assert_eq!(m.fields()[0], 0.5);
        assert_eq!(m.offset(), 0.5);
    }

    #[test]
    fn zero_model_converts_to_zero_model() {
        let q = Qubo::new(4);
        let m = to_ising(&q);
        assert!(m.fields().iter().all(|&h| h == 0.0));
        assert!(m.couplings().is_empty());
        assert_eq!(m.offset(), 0.0);
        let back = to_qubo(&m);
        assert_eq!(back, q);
    }

    #[test]
    fn conversion_preserves_all_energies() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let n = 10;
        let q = random_qubo(n, &mut rng);
        let m = to_ising(&q);
        let back = to_qubo(&m);
        for v in 0..(1usize << n) {
            let x = bits(v, n);
            let y = assignment_to_spins(&x);
            let eq = q.energy(&x).unwrap();
            let em = m.energy(&y).unwrap();
            let eb = back.energy(&x).unwrap();
            assert!((eq - em).abs() < 1e-12, "qubo {eq} vs ising {em}");
            assert!((eq - eb).abs() < 1e-12, "round trip {eb} vs {eq}");
        }
    }

    #[test]
    fn adjacency_is_symmetric_and_complete() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let q = random_qubo(6, &mut rng);
        let (off, ids, coeffs) = q.adjacency();
        let mut count = 0;
        for i in 0..6 {
            for k in off[i]..off[i + 1] {
                let j = ids[k] as usize;
                let key = (i.min(j) as u32, i.max(j) as u32);
                assert_eq!(coeffs[k], q.quadratic()[&key]);
                count += 1;
            }
        }
        assert_eq!(count, 2 * q.quadratic().len());
    }
}
