//! Constrained quadratic models: a quadratic objective over binary and
//! bounded-real variables plus explicit quadratic equality / inequality
//! constraints.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum VarDomain {
    Binary,
    /// Bounded real variable; both bounds must be finite.
    Real { lb: f64, ub: f64 },
}

/// Constraint sense: `expr == 0` or `expr <= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Eq,
    Le,
}

/// A quadratic expression `constant + Σ l_i x_i + Σ_{i<j} q_ij x_i x_j`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct QuadExpr {
    pub linear: BTreeMap<u32, f64>,
    pub quadratic: BTreeMap<(u32, u32), f64>,
    pub constant: f64,
}

impl QuadExpr {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        QuadExpr {
            constant: c,
            ..Default::default()
        }
    }

    pub fn add_linear(&mut self, var: usize, coeff: f64) -> &mut Self {
        if coeff != 0.0 {
            let slot = self.linear.entry(var as u32).or_insert(0.0);
            *slot += coeff;
            if *slot == 0.0 {
                self.linear.remove(&(var as u32));
            }
        }
        self
    }

    pub fn add_quadratic(&mut self, i: usize, j: usize, coeff: f64) -> &mut Self {
        if coeff == 0.0 {
            return self;
        }
        if i == j {
            // Valid only for binary variables, where x² = x. The model
            // validates domains separately.
            return self.add_linear(i, coeff);
        }
        let key = (i.min(j) as u32, i.max(j) as u32);
        let slot = self.quadratic.entry(key).or_insert(0.0);
        *slot += coeff;
        if *slot == 0.0 {
            self.quadratic.remove(&key);
        }
        self
    }

    pub fn add_constant(&mut self, c: f64) -> &mut Self {
        self.constant += c;
        self
    }

    pub fn is_linear(&self) -> bool {
        self.quadratic.is_empty()
    }

    pub fn evaluate(&self, values: &[f64]) -> f64 {
        let mut v = self.constant;
        for (&i, &c) in &self.linear {
            v += c * values[i as usize];
        }
        for (&(i, j), &c) in &self.quadratic {
            v += c * values[i as usize] * values[j as usize];
        }
        v
    }

    /// Range of the expression over independent variable boxes
    /// (binary → [0,1]); the true range over coupled assignments is contained
    /// in it.
    pub fn interval(&self, domains: &[VarDomain]) -> (f64, f64) {
        let mut lo = self.constant;
        let mut hi = self.constant;
        let bounds = |v: u32| match domains[v as usize] {
            VarDomain::Binary => (0.0, 1.0),
            VarDomain::Real { lb, ub } => (lb, ub),
        };
        for (&i, &c) in &self.linear {
            let (l, u) = bounds(i);
            lo += (c * l).min(c * u);
            hi += (c * l).max(c * u);
        }
        for (&(i, j), &c) in &self.quadratic {
            let (li, ui) = bounds(i);
            let (lj, uj) = bounds(j);
            let corners = [c * li * lj, c * li * uj, c * ui * lj, c * ui * uj];
            lo += corners.iter().cloned().fold(f64::INFINITY, f64::min);
            hi += corners.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        }
        (lo, hi)
    }

    /// True when every coefficient and the constant are integral
    /// (within `tol`).
    pub fn is_integral(&self, tol: f64) -> bool {
        let near_int = |x: f64| (x - x.round()).abs() <= tol;
        near_int(self.constant)
            && self.linear.values().all(|&c| near_int(c))
            && self.quadratic.values().all(|&c| near_int(c))
    }

    pub fn max_var(&self) -> Option<u32> {
        let l = self.linear.keys().next_back().copied();
        let q = self.quadratic.keys().next_back().map(|&(_, j)| j);
        match (l, q) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CqmConstraint {
    pub expr: QuadExpr,
    pub sense: Sense,
    /// Constraint family label; penalty weights are assigned per label.
    pub label: String,
}

/// Quadratic objective plus explicit constraints over binary / bounded-real
/// variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstrainedQuadraticModel {
    domains: Vec<VarDomain>,
    pub objective: QuadExpr,
    pub constraints: Vec<CqmConstraint>,
}

impl Default for ConstrainedQuadraticModel {
    fn default() -> Self {
        Self::new()
    }
}

impl ConstrainedQuadraticModel {
    pub fn new() -> Self {
        ConstrainedQuadraticModel {
            domains: Vec::new(),
            objective: QuadExpr::new(),
            constraints: Vec::new(),
        }
    }

    pub fn add_binary(&mut self) -> usize {
        self.domains.push(VarDomain::Binary);
        self.domains.len() - 1
    }

    pub fn add_real(&mut self, lb: f64, ub: f64) -> Result<usize> {
        if !(lb.is_finite() && ub.is_finite() && lb <= ub) {
            return Err(Error::invalid(format!(
                "real variables need finite bounds lb <= ub, got [{lb}, {ub}]"
            )));
        }
        self.domains.push(VarDomain::Real { lb, ub });
        Ok(self.domains.len() - 1)
    }

    pub fn num_vars(&self) -> usize {
        self.domains.len()
    }

    pub fn domains(&self) -> &[VarDomain] {
        &self.domains
    }

    pub fn domain(&self, var: usize) -> VarDomain {
        self.domains[var]
    }

    pub fn binary_vars(&self) -> impl Iterator<Item = usize> + '_ {
        self.domains
            .iter()
            .enumerate()
            .filter(|(_, d)| matches!(d, VarDomain::Binary))
            .map(|(i, _)| i)
    }

    pub fn real_vars(&self) -> impl Iterator<Item = usize> + '_ {
        self.domains
            .iter()
            .enumerate()
            .filter(|(_, d)| matches!(d, VarDomain::Real { .. }))
            .map(|(i, _)| i)
    }

    pub fn add_constraint(&mut self, expr: QuadExpr, sense: Sense, label: impl Into<String>) -> Result<()> {
        if let Some(max) = expr.max_var() {
            if max as usize >= self.num_vars() {
                return Err(Error::invalid(format!(
                    "constraint references undeclared variable {max}"
                )));
            }
        }
        self.constraints.push(CqmConstraint {
            expr,
            sense,
            label: label.into(),
        });
        Ok(())
    }

    /// Feasibility tolerance for a constraint: exact-ish for integral
    /// expressions over binaries, loose for real-coefficient expressions.
    pub fn constraint_tolerance(&self, c: &CqmConstraint) -> f64 {
        let pure_binary = c
            .expr
            .linear
            .keys()
            .chain(c.expr.quadratic.keys().flat_map(|(i, j)| [i, j]))
            .all(|&v| matches!(self.domains[v as usize], VarDomain::Binary));
        if pure_binary && c.expr.is_integral(1e-12) {
            1e-9
        } else {
            1e-6
        }
    }

    /// Evaluate all constraints at `values`; returns indices of violated
    /// constraints.
    pub fn violated_constraints(&self, values: &[f64]) -> Vec<usize> {
        self.constraints
            .iter()
            .enumerate()
            .filter(|(_, c)| {
                let v = c.expr.evaluate(values);
                let tol = self.constraint_tolerance(c);
                match c.sense {
                    Sense::Eq => v.abs() > tol,
                    Sense::Le => v > tol,
                }
            })
            .map(|(i, _)| i)
            .collect()
    }
}
