//! Unit-commitment model builders.
//!
//! Two formulations are produced here:
//!
//! - the all-quantum discretized QUBO, where each unit's output is encoded
//!   by one-hot level-selection bits and every operating constraint becomes
//!   a squared penalty (weights A..F);
//! - the decomposed master model over commitment bits only, with capacity,
//!   minimum up/down-time constraints and optimality cuts, either as a
//!   native constrained model or compiled to a pure QUBO with a
//!   binary-expanded cost variable λ.

use super::cqm::{ConstrainedQuadraticModel, QuadExpr, Sense, VarDomain};
use super::penalty::{compile_penalties, CompileInfo, PenaltyMap};
use super::{PenaltyWeights, Qubo};
use crate::benders::BendersCut;
use crate::error::{Error, Result};
use crate::model::{Schedule, UcInstance};

/// Uniform discretization of unit outputs into `segments` steps between
/// `p_min` and `p_max`: level `k ∈ 1..=segments+1` maps to
/// `p_min + step·(k-1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DiscretizedEncoding {
    pub segments: usize,
}

impl Default for DiscretizedEncoding {
    fn default() -> Self {
        DiscretizedEncoding { segments: 10 }
    }
}

impl DiscretizedEncoding {
    pub fn new(segments: usize) -> Result<Self> {
        if segments == 0 {
            return Err(Error::invalid("discretization needs at least one segment"));
        }
        Ok(DiscretizedEncoding { segments })
    }

    pub fn levels(&self) -> usize {
        self.segments + 1
    }

    /// Step size `(p_max - p_min) / segments` for one unit.
    pub fn step(&self, inst: &UcInstance, unit: usize) -> f64 {
        let u = &inst.units[unit];
        (u.p_max - u.p_min) / self.segments as f64
    }

    /// Output encoded by level `k ∈ 1..=segments+1`.
    pub fn level(&self, inst: &UcInstance, unit: usize, k: usize) -> f64 {
        debug_assert!((1..=self.levels()).contains(&k));
        inst.units[unit].p_min + self.step(inst, unit) * (k - 1) as f64
    }
}

/// Variable layout of the discretized model.
#[derive(Debug, Clone)]
pub struct DiscretizedMap {
    pub n_units: usize,
    pub n_hours: usize,
    pub encoding: DiscretizedEncoding,
}

impl DiscretizedMap {
    pub fn v_id(&self, unit: usize, hour: usize) -> usize {
        unit * self.n_hours + hour
    }

    /// Bit selecting level `k ∈ 1..=segments+1` for `(unit, hour)`.
    pub fn z_id(&self, unit: usize, hour: usize, k: usize) -> usize {
        debug_assert!((1..=self.encoding.levels()).contains(&k));
        self.n_units * self.n_hours
            + (unit * self.n_hours + hour) * self.encoding.levels()
            + (k - 1)
    }

    pub fn num_model_vars(&self) -> usize {
        self.n_units * self.n_hours * (1 + self.encoding.levels())
    }
}

/// Decode a sampled assignment of the discretized model into a commitment
/// and the encoded powers (`Σ level_k·z_k`, whatever bits were set).
pub fn decode_discretized(
    inst: &UcInstance,
    map: &DiscretizedMap,
    assignment: &[u8],
) -> Result<(Schedule, Vec<f64>)> {
    if assignment.len() < map.num_model_vars() {
        return Err(Error::invalid("assignment shorter than the model"));
    }
    let (n, t) = (map.n_units, map.n_hours);
    let mut sched = Schedule::all_off(n, t);
    let mut power = vec![0.0; n * t];
    for i in 0..n {
        for h in 0..t {
            sched.set(i, h, assignment[map.v_id(i, h)] != 0);
            let mut p = 0.0;
            for k in 1..=map.encoding.levels() {
                if assignment[map.z_id(i, h, k)] != 0 {
                    p += map.encoding.level(inst, i, k);
                }
            }
            power[i * t + h] = p;
        }
    }
    Ok((sched, power))
}

/// Constraint labels shared by the builders and the samplers.
pub mod labels {
    pub const LOAD: &str = "load";
    pub const ONE_HOT: &str = "one_hot";
    pub const CAPACITY: &str = "capacity";
    pub const MIN_UP: &str = "min_up";
    pub const MIN_DOWN: &str = "min_down";
    pub const RAMP_UP: &str = "ramp_up";
    pub const RAMP_DOWN: &str = "ramp_down";
    pub const CUT: &str = "cut";
    pub const INITIAL: &str = "initial";
}

/// The discretized single-shot formulation as a constrained model, before
/// penalty compilation. Exposed for the exact oracles in tests.
pub fn build_discretized_cqm(
    inst: &UcInstance,
    enc: &DiscretizedEncoding,
) -> (ConstrainedQuadraticModel, DiscretizedMap) {
    let (n, t) = (inst.n_units(), inst.hours());
    let map = DiscretizedMap {
        n_units: n,
        n_hours: t,
        encoding: *enc,
    };
    let mut cqm = ConstrainedQuadraticModel::new();
    for _ in 0..map.num_model_vars() {
        cqm.add_binary();
    }

    // Objective: Σ a·v + b·p + c·p² with p = Σ level_k z_k; z_k z_k = z_k.
    let mut obj = QuadExpr::new();
    for i in 0..n {
        let u = &inst.units[i];
        for h in 0..t {
            obj.add_linear(map.v_id(i, h), u.no_load_cost);
            for k in 1..=enc.levels() {
                let lk = enc.level(inst, i, k);
                obj.add_linear(map.z_id(i, h, k), u.linear_cost * lk + u.quad_cost * lk * lk);
                for k2 in (k + 1)..=enc.levels() {
                    let lk2 = enc.level(inst, i, k2);
                    obj.add_quadratic(
                        map.z_id(i, h, k),
                        map.z_id(i, h, k2),
                        2.0 * u.quad_cost * lk * lk2,
                    );
                }
            }
        }
    }
    cqm.objective = obj;

    // Load balance per hour: Σ_i p_{i,t} = L_t.
    for h in 0..t {
        let mut e = QuadExpr::new();
        for i in 0..n {
            for k in 1..=enc.levels() {
                e.add_linear(map.z_id(i, h, k), enc.level(inst, i, k));
            }
        }
        e.add_constant(-inst.load.demand[h]);
        cqm.add_constraint(e, Sense::Eq, labels::LOAD).unwrap();
    }

    // Level selection: exactly one level when committed, none when off.
    for i in 0..n {
        for h in 0..t {
            let mut e = QuadExpr::new();
            for k in 1..=enc.levels() {
                e.add_linear(map.z_id(i, h, k), 1.0);
            }
            e.add_linear(map.v_id(i, h), -1.0);
            cqm.add_constraint(e, Sense::Eq, labels::ONE_HOT).unwrap();
        }
    }

    // Minimum up/down times over sliding windows that fit the horizon.
    for i in 0..n {
        let u = &inst.units[i];
        let init_on = if inst.initially_on(i) { 1.0 } else { 0.0 };
        let ut = u.min_up as usize;
        let dt = u.min_down as usize;
        if ut > 1 && t >= ut {
            for t0 in 0..=(t - ut) {
                // UT·(v_t0 - v_{t0-1}) - Σ_{τ∈[t0, t0+UT-1]} v_τ <= 0
                let mut e = QuadExpr::new();
                e.add_linear(map.v_id(i, t0), ut as f64);
                if t0 == 0 {
                    e.add_constant(-(ut as f64) * init_on);
                } else {
                    e.add_linear(map.v_id(i, t0 - 1), -(ut as f64));
                }
                for tau in t0..t0 + ut {
                    e.add_linear(map.v_id(i, tau), -1.0);
                }
                cqm.add_constraint(e, Sense::Le, labels::MIN_UP).unwrap();
            }
        }
        if dt > 1 && t >= dt {
            for t0 in 0..=(t - dt) {
                // DT·(v_{t0-1} - v_t0) - Σ_{τ∈[t0, t0+DT-1]} (1 - v_τ) <= 0
                let mut e = QuadExpr::new();
                e.add_linear(map.v_id(i, t0), -(dt as f64));
                if t0 == 0 {
                    e.add_constant((dt as f64) * init_on);
                } else {
                    e.add_linear(map.v_id(i, t0 - 1), dt as f64);
                }
                e.add_constant(-(dt as f64));
                for tau in t0..t0 + dt {
                    e.add_linear(map.v_id(i, tau), 1.0);
                }
                cqm.add_constraint(e, Sense::Le, labels::MIN_DOWN).unwrap();
            }
        }
    }

    // Hour-to-hour ramp limits on the encoded powers.
    for i in 0..n {
        let u = &inst.units[i];
        for h in 1..t {
            let mut up = QuadExpr::new();
            let mut down = QuadExpr::new();
            for k in 1..=enc.levels() {
                let lk = enc.level(inst, i, k);
                up.add_linear(map.z_id(i, h, k), lk);
                up.add_linear(map.z_id(i, h - 1, k), -lk);
                down.add_linear(map.z_id(i, h - 1, k), lk);
                down.add_linear(map.z_id(i, h, k), -lk);
            }
            up.add_linear(map.v_id(i, h), -u.ramp_up);
            down.add_linear(map.v_id(i, h - 1), -u.ramp_down);
            cqm.add_constraint(up, Sense::Le, labels::RAMP_UP).unwrap();
            cqm.add_constraint(down, Sense::Le, labels::RAMP_DOWN).unwrap();
        }
    }

    (cqm, map)
}

/// Compile the discretized unit-commitment formulation to a penalty QUBO.
///
/// The six weights attach to the constraint families in order: A load
/// balance, B level selection, C minimum up time, D minimum down time,
/// E ramp up, F ramp down.
pub fn build_discretized_ucqubo(
    inst: &UcInstance,
    enc: &DiscretizedEncoding,
    w: &PenaltyWeights,
) -> Result<(Qubo, DiscretizedMap, CompileInfo)> {
    w.validate()?;
    let (cqm, map) = build_discretized_cqm(inst, enc);
    let weights = PenaltyMap::new()
        .with(labels::LOAD, w.a)
        .with(labels::ONE_HOT, w.b)
        .with(labels::MIN_UP, w.c)
        .with(labels::MIN_DOWN, w.d)
        .with(labels::RAMP_UP, w.e)
        .with(labels::RAMP_DOWN, w.f);
    let (q, info) = compile_penalties(&cqm, &weights)?;
    Ok((q, map, info))
}

/// Default discretized-model weights: twice the largest objective
/// coefficient times the horizon length, for every family.
pub fn default_discretized_weights(inst: &UcInstance, enc: &DiscretizedEncoding) -> PenaltyWeights {
    let mut m: f64 = 1.0;
    for (i, u) in inst.units.iter().enumerate() {
        let top = enc.level(inst, i, enc.levels());
        m = m
            .max(u.no_load_cost)
            .max(u.linear_cost * top + u.quad_cost * top * top);
    }
    PenaltyWeights::uniform(2.0 * m * inst.hours() as f64)
}

/// Variable layout of the decomposed master model.
#[derive(Debug, Clone)]
pub struct MasterMap {
    pub n_units: usize,
    pub n_hours: usize,
    /// Id of the subproblem-cost variable λ in the constrained model; its
    /// binary expansion replaces it in the compiled QUBO.
    pub lambda_var: usize,
    /// Scale and bit count of the λ expansion (pure-QUBO path only).
    pub lambda_bits: Vec<(usize, f64)>,
}

impl MasterMap {
    pub fn v_id(&self, unit: usize, hour: usize) -> usize {
        unit * self.n_hours + hour
    }

    pub fn schedule_from(&self, values: &[u8]) -> Schedule {
        let mut s = Schedule::all_off(self.n_units, self.n_hours);
        for i in 0..self.n_units {
            for h in 0..self.n_hours {
                s.set(i, h, values[self.v_id(i, h)] != 0);
            }
        }
        s
    }

    pub fn lambda_from(&self, values: &[u8]) -> f64 {
        self.lambda_bits
            .iter()
            .map(|&(var, coeff)| values[var] as f64 * coeff)
            .sum()
    }
}

/// Upper bound on λ: no dispatch can cost more than everything running flat
/// out plus fully slack-priced demand.
fn lambda_upper_bound(inst: &UcInstance) -> f64 {
    let run_flat: f64 = inst
        .units
        .iter()
        .map(|u| u.linear_cost * u.p_max + u.quad_cost * u.p_max * u.p_max)
        .sum::<f64>()
        * inst.hours() as f64;
    let pi = crate::dispatch::default_slack_penalty(inst);
    let slack_all: f64 = inst.load.demand.iter().sum::<f64>() * pi;
    run_flat + slack_all
}

/// Decomposed master problem: pick commitments minimizing no-load cost plus
/// the cut-bounded subproblem cost λ, subject to capacity coverage and
/// minimum up/down times.
pub fn build_master_cqm(
    inst: &UcInstance,
    cuts: &[BendersCut],
) -> Result<(ConstrainedQuadraticModel, MasterMap)> {
    let (n, t) = (inst.n_units(), inst.hours());
    let mut cqm = ConstrainedQuadraticModel::new();
    for _ in 0..n * t {
        cqm.add_binary();
    }
    let lambda = cqm.add_real(0.0, lambda_upper_bound(inst))?;
    let map = MasterMap {
        n_units: n,
        n_hours: t,
        lambda_var: lambda,
        lambda_bits: Vec::new(),
    };

    let mut obj = QuadExpr::new();
    for i in 0..n {
        for h in 0..t {
            obj.add_linear(map.v_id(i, h), inst.units[i].no_load_cost);
        }
    }
    obj.add_linear(lambda, 1.0);
    cqm.objective = obj;

    // Committed capacity must cover demand plus reserve each hour.
    for h in 0..t {
        let mut e = QuadExpr::new();
        e.add_constant(inst.load.required_capacity(h));
        for i in 0..n {
            e.add_linear(map.v_id(i, h), -inst.units[i].p_max);
        }
        cqm.add_constraint(e, Sense::Le, labels::CAPACITY)?;
    }

    // Up/down-time windows. Truncated end-of-horizon windows are included so
    // that a run which both starts and ends near the horizon edge still
    // honours its minimum length; runs that stay open through hour T are
    // unconstrained.
    for i in 0..n {
        let u = &inst.units[i];
        let init_on = if inst.initially_on(i) { 1.0 } else { 0.0 };
        let ut = u.min_up as usize;
        let dt = u.min_down as usize;
        if ut > 1 {
            for t0 in 0..t {
                let e_end = (t0 + ut - 1).min(t - 1);
                let w_len = (e_end - t0 + 1) as f64;
                let mut e = QuadExpr::new();
                e.add_linear(map.v_id(i, t0), w_len);
                if t0 == 0 {
                    e.add_constant(-w_len * init_on);
                } else {
                    e.add_linear(map.v_id(i, t0 - 1), -w_len);
                }
                for tau in t0..=e_end {
                    e.add_linear(map.v_id(i, tau), -1.0);
                }
                cqm.add_constraint(e, Sense::Le, labels::MIN_UP)?;
            }
        }
        if dt > 1 {
            for t0 in 0..t {
                let e_end = (t0 + dt - 1).min(t - 1);
                let w_len = (e_end - t0 + 1) as f64;
                let mut e = QuadExpr::new();
                e.add_linear(map.v_id(i, t0), -w_len);
                if t0 == 0 {
                    e.add_constant(w_len * init_on);
                } else {
                    e.add_linear(map.v_id(i, t0 - 1), w_len);
                }
                e.add_constant(-w_len);
                for tau in t0..=e_end {
                    e.add_linear(map.v_id(i, tau), 1.0);
                }
                cqm.add_constraint(e, Sense::Le, labels::MIN_DOWN)?;
            }
        }

        // Unserved initial up/down time pins the first hours.
        let served = inst.initial_status[i].unsigned_abs() as usize;
        if inst.initially_on(i) && served < ut {
            for h in 0..(ut - served).min(t) {
                let mut e = QuadExpr::new();
                e.add_linear(map.v_id(i, h), 1.0).add_constant(-1.0);
                cqm.add_constraint(e, Sense::Eq, labels::INITIAL)?;
            }
        }
        if !inst.initially_on(i) && served < dt {
            for h in 0..(dt - served).min(t) {
                let mut e = QuadExpr::new();
                e.add_linear(map.v_id(i, h), 1.0);
                cqm.add_constraint(e, Sense::Eq, labels::INITIAL)?;
            }
        }
    }

    // Optimality cuts: λ >= ŵ_j + Σ μ_j·(v - v̂_j).
    for cut in cuts {
        if cut.mu.len() != n * t || cut.v_hat.len() != n * t {
            return Err(Error::invalid("cut dimensions do not match instance"));
        }
        let mut e = QuadExpr::new();
        e.add_constant(cut.w_hat);
        for idx in 0..n * t {
            e.add_linear(idx, cut.mu[idx]);
            if cut.v_hat[idx] {
                e.add_constant(-cut.mu[idx]);
            }
        }
        e.add_linear(lambda, -1.0);
        cqm.add_constraint(e, Sense::Le, labels::CUT)?;
    }

    Ok((cqm, map))
}

/// Pure-QUBO master: λ binary-expanded over `lambda_bits` bits of size
/// `lambda_scale` (default: upper bound divided by the largest expansion
/// value), every constraint compiled as a one-sided squared penalty.
/// Weights: A capacity (and initial-condition pins), B minimum up time,
/// C minimum down time, D optimality cuts.
pub fn build_master_qubo(
    inst: &UcInstance,
    cuts: &[BendersCut],
    w: &PenaltyWeights,
    lambda_bits: u32,
    lambda_scale: Option<f64>,
) -> Result<(Qubo, MasterMap, CompileInfo)> {
    if lambda_bits == 0 {
        return Err(Error::invalid("lambda expansion needs at least one bit"));
    }
    w.validate()?;
    let (cqm, map) = build_master_cqm(inst, cuts)?;
    let max_count = ((1u64 << lambda_bits) - 1) as f64;
    let scale = match lambda_scale {
        Some(s) if s > 0.0 => s,
        Some(_) => return Err(Error::invalid("lambda scale must be positive")),
        None => lambda_upper_bound(inst) / max_count,
    };
    let (bin, lambda_map) = binarize_single_real(&cqm, map.lambda_var, lambda_bits, scale)?;
    let weights = PenaltyMap::new()
        .with(labels::CAPACITY, w.a)
        .with(labels::INITIAL, w.a)
        .with(labels::MIN_UP, w.b)
        .with(labels::MIN_DOWN, w.c)
        .with(labels::CUT, w.d);
    let (q, info) = compile_penalties(&bin, &weights)?;
    let map = MasterMap {
        lambda_bits: lambda_map,
        ..map
    };
    Ok((q, map, info))
}

/// Default master weights: twice the largest commitment-cost coefficient
/// times the horizon length.
pub fn default_master_weights(inst: &UcInstance) -> PenaltyWeights {
    let a_max = inst
        .units
        .iter()
        .map(|u| u.no_load_cost)
        .fold(1.0f64, f64::max);
    PenaltyWeights::uniform(2.0 * a_max * inst.hours() as f64)
}

/// Replace one bounded-real variable appearing linearly by a binary
/// expansion `lb + scale·Σ 2^j β_j`. Returns the rewritten model and the
/// `(bit id, level)` pairs.
fn binarize_single_real(
    cqm: &ConstrainedQuadraticModel,
    var: usize,
    bits: u32,
    scale: f64,
) -> Result<(ConstrainedQuadraticModel, Vec<(usize, f64)>)> {
    let (lb, _ub) = match cqm.domain(var) {
        VarDomain::Real { lb, ub } => (lb, ub),
        VarDomain::Binary => return Err(Error::invalid("variable to binarize is already binary")),
    };
    if cqm
        .objective
        .quadratic
        .keys()
        .chain(cqm.constraints.iter().flat_map(|c| c.expr.quadratic.keys()))
        .any(|&(i, j)| i as usize == var || j as usize == var)
    {
        return Err(Error::UnsupportedModel(
            "binarization supports linear occurrences only".into(),
        ));
    }

    // New model: all variables binary; `var`'s slot becomes an unused binary
    // (kept so the ids of the commitment bits stay stable), the expansion
    // bits are appended at the end.
    let mut out = ConstrainedQuadraticModel::new();
    for _ in 0..cqm.num_vars() {
        out.add_binary();
    }
    let mut bit_ids = Vec::new();
    for j in 0..bits {
        let id = out.add_binary();
        bit_ids.push((id, scale * (1u64 << j) as f64));
    }

    let rewrite = |expr: &QuadExpr| -> QuadExpr {
        let mut e = expr.clone();
        if let Some(c) = e.linear.remove(&(var as u32)) {
            e.add_constant(c * lb);
            for &(id, lvl) in &bit_ids {
                e.add_linear(id, c * lvl);
            }
        }
        e
    };

    out.objective = rewrite(&cqm.objective);
    for c in &cqm.constraints {
        out.add_constraint(rewrite(&c.expr), c.sense, c.label.clone())?;
    }
    Ok((out, bit_ids))
}
