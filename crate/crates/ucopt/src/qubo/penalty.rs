//! Penalty compilation: constrained model → unconstrained QUBO.
//!
//! Equalities `g = 0` become `w·g²`. Inequalities `g <= 0` get a
//! binary-expanded slack `σ ∈ [0, -g_min]` and become `w·(g + σ)²`, so the
//! penalty vanishes exactly on satisfied constraints (for integral
//! expressions) and grows quadratically with the violation otherwise.

use super::cqm::{ConstrainedQuadraticModel, QuadExpr, Sense, VarDomain};
use super::Qubo;
use crate::error::{Error, Result};
use std::collections::BTreeMap;

/// Per-family penalty weights, keyed by constraint label.
#[derive(Debug, Clone, Default)]
pub struct PenaltyMap {
    weights: BTreeMap<String, f64>,
}

impl PenaltyMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, label: impl Into<String>, weight: f64) -> Self {
        self.weights.insert(label.into(), weight);
        self
    }

    pub fn set(&mut self, label: impl Into<String>, weight: f64) {
        self.weights.insert(label.into(), weight);
    }

    pub fn get(&self, label: &str) -> Option<f64> {
        self.weights.get(label).copied()
    }

    /// Same weight for every label that appears in the model.
    pub fn uniform(cqm: &ConstrainedQuadraticModel, weight: f64) -> Self {
        let mut m = PenaltyMap::new();
        for c in &cqm.constraints {
            m.weights.insert(c.label.clone(), weight);
        }
        m
    }

    /// Multiply every weight, used by the escalation loop in the samplers.
    pub fn scaled(&self, factor: f64) -> Self {
        PenaltyMap {
            weights: self
                .weights
                .iter()
                .map(|(k, v)| (k.clone(), v * factor))
                .collect(),
        }
    }
}

/// Where the slack bits of one inequality live in the compiled model.
#[derive(Debug, Clone)]
pub struct SlackInfo {
    pub constraint: usize,
    /// Variable ids of the slack bits, paired with their level coefficients.
    pub bits: Vec<(usize, f64)>,
}

/// Compilation record: original-variable count and slack layout.
#[derive(Debug, Clone)]
pub struct CompileInfo {
    pub n_original: usize,
    pub slacks: Vec<SlackInfo>,
}

impl CompileInfo {
    /// Minimum of the compiled penalty energy over slack completions, for a
    /// fixed assignment of original variables. Equals
    /// `Σ_eq w·g² + Σ_ineq w·max(0, g)²` for integral expressions.
    pub fn penalty_floor(
        &self,
        cqm: &ConstrainedQuadraticModel,
        weights: &PenaltyMap,
        values: &[f64],
    ) -> f64 {
        let mut total = 0.0;
        for (idx, c) in cqm.constraints.iter().enumerate() {
            let w = weights.get(&c.label).unwrap_or(0.0);
            let g = c.expr.evaluate(values);
            let viol = match c.sense {
                Sense::Eq => g,
                Sense::Le => g.max(0.0),
            };
            let _ = idx;
            total += w * viol * viol;
        }
        total
    }
}

/// Compile a binary-only constrained model into a penalty QUBO.
///
/// Every constraint label must carry a weight. Real variables must be
/// binarized by the caller first; quadratic constraint expressions would
/// square to quartic terms and are rejected.
pub fn compile_penalties(
    cqm: &ConstrainedQuadraticModel,
    weights: &PenaltyMap,
) -> Result<(Qubo, CompileInfo)> {
    if cqm.real_vars().next().is_some() {
        return Err(Error::UnsupportedModel(
            "penalty compilation requires all-binary variables; binarize real variables first"
                .into(),
        ));
    }
    for c in &cqm.constraints {
        if !c.expr.is_linear() {
            return Err(Error::UnsupportedModel(format!(
                "constraint '{}' has quadratic terms; squared penalties would be quartic",
                c.label
            )));
        }
        if weights.get(&c.label).is_none() {
            return Err(Error::invalid(format!(
                "no penalty weight for constraint label '{}'",
                c.label
            )));
        }
    }

    let n = cqm.num_vars();
    let mut q = Qubo::new(n);
    add_expr(&mut q, &cqm.objective, 1.0);

    let mut info = CompileInfo {
        n_original: n,
        slacks: Vec::new(),
    };

    for (idx, c) in cqm.constraints.iter().enumerate() {
        let w = weights.get(&c.label).unwrap();
        let mut expr = c.expr.clone();
        let mut bits = Vec::new();
        if c.sense == Sense::Le {
            let (g_min, g_max) = c.expr.interval(cqm.domains());
            if g_max <= 1e-12 {
                // The constraint can never be violated; no penalty needed.
                continue;
            }
            // Slack covers [0, -g_min]; nothing to add when the expression
            // cannot go negative.
            if g_min < -1e-12 {
                for coeff in slack_levels(&c.expr, -g_min) {
                    let var = q.push_var();
                    bits.push((var, coeff));
                    expr.linear.insert(var as u32, coeff);
                }
            }
        }
        add_squared(&mut q, &expr, w);
        if !bits.is_empty() {
            info.slacks.push(SlackInfo {
                constraint: idx,
                bits,
            });
        }
    }

    Ok((q, info))
}

/// Slack level coefficients covering `[0, range]`.
///
/// Integral expressions get an exact unit-step expansion
/// `1, 2, 4, …, remainder`; otherwise an 8-bit geometric grid with step
/// `range / 255` (quantization then limits how exactly the penalty can reach
/// zero).
fn slack_levels(expr: &QuadExpr, range: f64) -> Vec<f64> {
    debug_assert!(range > 0.0);
    if expr.is_integral(1e-9) {
        // Powers of two plus a remainder: subset sums cover 0..=top exactly.
        let top = range.round() as u64;
        let mut levels = Vec::new();
        let mut covered = 0u64;
        while covered < top {
            let lvl = (covered + 1).min(top - covered);
            levels.push(lvl as f64);
            covered += lvl;
        }
        levels
    } else {
        const BITS: u32 = 8;
        let step = range / ((1u64 << BITS) - 1) as f64;
        (0..BITS).map(|j| step * (1u64 << j) as f64).collect()
    }
}

fn add_expr(q: &mut Qubo, e: &QuadExpr, scale: f64) {
    q.add_offset(scale * e.constant);
    for (&i, &c) in &e.linear {
        q.add_linear(i as usize, scale * c);
    }
    for (&(i, j), &c) in &e.quadratic {
        q.add_quadratic(i as usize, j as usize, scale * c);
    }
}

/// Add `w · (Σ l_i x_i + c)²` to the model, folding x² = x.
fn add_squared(q: &mut Qubo, e: &QuadExpr, w: f64) {
    debug_assert!(e.is_linear());
    let c = e.constant;
    q.add_offset(w * c * c);
    let terms: Vec<(u32, f64)> = e.linear.iter().map(|(&i, &l)| (i, l)).collect();
    for (a, &(i, li)) in terms.iter().enumerate() {
        q.add_linear(i as usize, w * (li * li + 2.0 * c * li));
        for &(j, lj) in &terms[a + 1..] {
            q.add_quadratic(i as usize, j as usize, 2.0 * w * li * lj);
        }
    }
}
