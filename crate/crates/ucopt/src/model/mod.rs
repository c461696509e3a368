//! Unit commitment problem instances and exact evaluation.
//!
//! An instance is a set of thermal units with quadratic production cost
//! `a·v + b·p + c·p²`, a ramp rate, and minimum up/down times, together with
//! an hourly demand profile. A candidate solution is a binary commitment
//! matrix (`Schedule`) plus a continuous power matrix (`DispatchSolution`);
//! this module prices candidates exactly and reports every constraint
//! violation.

mod feasibility;

pub use feasibility::{check_feasibility, commitment_feasible, Violation, ViolationKind};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Feasibility tolerance for continuous (MW-valued) constraints.
/// Binary constraints are checked exactly.
pub const EPS_FEAS: f64 = 1e-6;

/// One generating unit. Cost of running at power `p` for one hour is
/// `a + b·p + c·p²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Unit {
    /// No-load cost per committed hour ($).
    #[serde(rename = "a")]
    pub no_load_cost: f64,
    /// Linear production cost ($/MWh).
    #[serde(rename = "b")]
    pub linear_cost: f64,
    /// Quadratic production cost ($/MW²h).
    #[serde(rename = "c")]
    pub quad_cost: f64,
    /// Maximum output when committed (MW).
    pub p_max: f64,
    /// Minimum output when committed (MW).
    pub p_min: f64,
    /// Minimum consecutive hours on once started (h).
    pub min_up: u32,
    /// Minimum consecutive hours off once stopped (h).
    pub min_down: u32,
    /// Maximum hourly output increase (MW/h).
    pub ramp_up: f64,
    /// Maximum hourly output decrease (MW/h).
    pub ramp_down: f64,
}

impl Unit {
    pub fn validate(&self, idx: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::invalid(format!("unit {idx}: {msg}")));
        if !(0.0 <= self.p_min && self.p_min <= self.p_max) {
            return bad(format!(
                "need 0 <= p_min <= p_max, got [{}, {}]",
                self.p_min, self.p_max
            ));
        }
        if self.quad_cost < 0.0 {
            return bad(format!("quadratic cost must be >= 0, got {}", self.quad_cost));
        }
        if self.linear_cost < 0.0 {
            return bad(format!("linear cost must be >= 0, got {}", self.linear_cost));
        }
        if self.no_load_cost < 0.0 {
            return bad(format!("no-load cost must be >= 0, got {}", self.no_load_cost));
        }
        if self.min_up < 1 || self.min_down < 1 {
            return bad("min up/down times must be >= 1 hour".into());
        }
        if !(self.ramp_up > 0.0 && self.ramp_down > 0.0) {
            return bad("ramp rates must be > 0".into());
        }
        Ok(())
    }

    /// Marginal cost at full output, `b + 2·c·p_max`.
    pub fn max_marginal_cost(&self) -> f64 {
        self.linear_cost + 2.0 * self.quad_cost * self.p_max
    }

    /// Production cost of one hour at power `p` while committed.
    pub fn hour_cost(&self, p: f64) -> f64 {
        self.no_load_cost + self.linear_cost * p + self.quad_cost * p * p
    }
}

/// Hourly demand, plus the spinning-reserve fraction `r`: committed capacity
/// at hour `t` must cover `demand[t] * (1 + r)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadProfile {
    pub demand: Vec<f64>,
    #[serde(default)]
    pub reserve_fraction: f64,
}

impl LoadProfile {
    pub fn new(demand: Vec<f64>, reserve_fraction: f64) -> Result<Self> {
        let lp = LoadProfile {
            demand,
            reserve_fraction,
        };
        lp.validate()?;
        Ok(lp)
    }

    pub fn validate(&self) -> Result<()> {
        if self.demand.is_empty() {
            return Err(Error::invalid("load profile must have at least one hour"));
        }
        if self.demand.iter().any(|&l| !(l > 0.0)) {
            return Err(Error::invalid("hourly demand must be > 0"));
        }
        if !(self.reserve_fraction >= 0.0) {
            return Err(Error::invalid("reserve fraction must be >= 0"));
        }
        Ok(())
    }

    pub fn hours(&self) -> usize {
        self.demand.len()
    }

    /// Demand plus spinning reserve at hour `t` (0-based).
    pub fn required_capacity(&self, t: usize) -> f64 {
        self.demand[t] * (1.0 + self.reserve_fraction)
    }
}

/// A unit commitment problem instance.
///
/// `initial_status[i]` is signed hours before hour 0: `+h` means unit `i` has
/// already been on for `h` hours, `-h` off for `h` hours.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UcInstance {
    pub units: Vec<Unit>,
    #[serde(flatten)]
    pub load: LoadProfile,
    pub initial_status: Vec<i32>,
}

impl UcInstance {
    pub fn new(units: Vec<Unit>, load: LoadProfile, initial_status: Vec<i32>) -> Result<Self> {
        let inst = UcInstance {
            units,
            load,
            initial_status,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        if self.units.is_empty() {
            return Err(Error::invalid("instance must have at least one unit"));
        }
        for (i, u) in self.units.iter().enumerate() {
            u.validate(i)?;
        }
        self.load.validate()?;
        if self.initial_status.len() != self.units.len() {
            return Err(Error::invalid(format!(
                "initial_status has {} entries for {} units",
                self.initial_status.len(),
                self.units.len()
            )));
        }
        if self.initial_status.iter().any(|&s| s == 0) {
            return Err(Error::invalid(
                "initial_status entries must be nonzero signed hours",
            ));
        }
        let cap: f64 = self.units.iter().map(|u| u.p_max).sum();
        let peak = (0..self.load.hours())
            .map(|t| self.load.required_capacity(t))
            .fold(0.0, f64::max);
        if peak > cap + EPS_FEAS {
            return Err(Error::invalid(format!(
                "instance is not capacity-feasible: peak requirement {peak} MW exceeds total capacity {cap} MW"
            )));
        }
        Ok(())
    }

    pub fn n_units(&self) -> usize {
        self.units.len()
    }

    pub fn hours(&self) -> usize {
        self.load.hours()
    }

    /// Total installed capacity, `Σ p_max`.
    pub fn total_capacity(&self) -> f64 {
        self.units.iter().map(|u| u.p_max).sum()
    }

    /// Signed on/off state just before hour 0: `true` if the unit enters the
    /// horizon running.
    pub fn initially_on(&self, unit: usize) -> bool {
        self.initial_status[unit] > 0
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let inst: UcInstance = serde_json::from_str(s)?;
        inst.validate()?;
        Ok(inst)
    }

    pub fn from_path(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// The committed reference system: ten units and a 24-hour demand cycle,
/// embedded from `data/uc10.json`.
pub fn reference_instance() -> UcInstance {
    const UC10: &str = include_str!("../../../../data/uc10.json");
    UcInstance::from_json_str(UC10).expect("embedded uc10.json must parse")
}

/// Duplicate an instance `k` times: `k` copies of every unit (copy-major
/// ordering, so unit `j` of copy `m` has index `m * n + j`) and demand scaled
/// by `k` at every hour.
pub fn scale_instance(base: &UcInstance, k: u32) -> Result<UcInstance> {
    if k == 0 {
        return Err(Error::invalid("scale factor k must be >= 1"));
    }
    let k_us = k as usize;
    let mut units = Vec::with_capacity(base.units.len() * k_us);
    let mut initial = Vec::with_capacity(base.units.len() * k_us);
    for _ in 0..k {
        units.extend(base.units.iter().cloned());
        initial.extend(base.initial_status.iter().copied());
    }
    let demand = base.load.demand.iter().map(|l| l * k as f64).collect();
    UcInstance::new(
        units,
        LoadProfile {
            demand,
            reserve_fraction: base.load.reserve_fraction,
        },
        initial,
    )
}

/// Binary commitment matrix: `on(i, t)` is true when unit `i` runs in hour `t`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Schedule {
    n_units: usize,
    n_hours: usize,
    bits: Vec<bool>,
}

impl Schedule {
    pub fn all_off(n_units: usize, n_hours: usize) -> Self {
        Schedule {
            n_units,
            n_hours,
            bits: vec![false; n_units * n_hours],
        }
    }

    pub fn all_on(n_units: usize, n_hours: usize) -> Self {
        Schedule {
            n_units,
            n_hours,
            bits: vec![true; n_units * n_hours],
        }
    }

    /// Build from row-major bits (unit-major: index `i * n_hours + t`).
    pub fn from_bits(n_units: usize, n_hours: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != n_units * n_hours {
            return Err(Error::invalid(format!(
                "schedule needs {} bits, got {}",
                n_units * n_hours,
                bits.len()
            )));
        }
        Ok(Schedule {
            n_units,
            n_hours,
            bits,
        })
    }

    pub fn n_units(&self) -> usize {
        self.n_units
    }

    pub fn n_hours(&self) -> usize {
        self.n_hours
    }

    #[inline]
    pub fn on(&self, unit: usize, hour: usize) -> bool {
        self.bits[unit * self.n_hours + hour]
    }

    #[inline]
    pub fn set(&mut self, unit: usize, hour: usize, value: bool) {
        self.bits[unit * self.n_hours + hour] = value;
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count_on(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Committed capacity `Σ p_max·v` at hour `t`.
    pub fn committed_capacity(&self, inst: &UcInstance, t: usize) -> f64 {
        (0..self.n_units)
            .filter(|&i| self.on(i, t))
            .map(|i| inst.units[i].p_max)
            .sum()
    }

    pub fn matches(&self, inst: &UcInstance) -> bool {
        self.n_units == inst.n_units() && self.n_hours == inst.hours()
    }
}

/// Continuous dispatch: power per unit and hour plus the cost breakdown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispatchSolution {
    n_units: usize,
    n_hours: usize,
    /// Row-major powers, `power[i * n_hours + t]` in MW.
    power: Vec<f64>,
    pub total_cost: f64,
    pub per_hour_cost: Vec<f64>,
}

impl DispatchSolution {
    pub fn from_power(
        inst: &UcInstance,
        sched: &Schedule,
        power: Vec<f64>,
    ) -> Result<DispatchSolution> {
        let (n, t) = (inst.n_units(), inst.hours());
        if power.len() != n * t || !sched.matches(inst) {
            return Err(Error::invalid("dispatch dimensions do not match instance"));
        }
        let mut per_hour = vec![0.0; t];
        for i in 0..n {
            for h in 0..t {
                if sched.on(i, h) {
                    per_hour[h] += inst.units[i].hour_cost(power[i * t + h]);
                }
            }
        }
        let total = per_hour.iter().sum();
        Ok(DispatchSolution {
            n_units: n,
            n_hours: t,
            power,
            total_cost: total,
            per_hour_cost: per_hour,
        })
    }

    #[inline]
    pub fn power(&self, unit: usize, hour: usize) -> f64 {
        self.power[unit * self.n_hours + hour]
    }

    pub fn powers(&self) -> &[f64] {
        &self.power
    }

    /// Total generation `Σ_i p_{i,t}` at hour `t`.
    pub fn generation(&self, t: usize) -> f64 {
        (0..self.n_units).map(|i| self.power(i, t)).sum()
    }
}

/// Total cost `Σ_t Σ_i a_i·v_{i,t} + b_i·p_{i,t} + c_i·p_{i,t}²`.
///
/// `v` uses the on-convention: a unit contributes its no-load cost exactly
/// in the hours it is committed.
pub fn evaluate_cost(inst: &UcInstance, sched: &Schedule, disp: &DispatchSolution) -> Result<f64> {
    let (n, t) = (inst.n_units(), inst.hours());
    if !sched.matches(inst) || disp.n_units != n || disp.n_hours != t {
        return Err(Error::invalid(
            "schedule/dispatch dimensions do not match instance",
        ));
    }
    let mut total = 0.0;
    for i in 0..n {
        let u = &inst.units[i];
        for h in 0..t {
            if sched.on(i, h) {
                total += u.hour_cost(disp.power(i, h));
            } else {
                // Offline hours contribute b·p + c·p² on whatever power they
                // carry; a consistent dispatch has p = 0 here.
                let p = disp.power(i, h);
                total += u.linear_cost * p + u.quad_cost * p * p;
            }
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_unit() -> Unit {
        Unit {
            no_load_cost: 100.0,
            linear_cost: 10.0,
            quad_cost: 0.01,
            p_max: 100.0,
            p_min: 20.0,
            min_up: 2,
            min_down: 2,
            ramp_up: 50.0,
            ramp_down: 50.0,
        }
    }

    #[test]
    fn reference_instance_matches_published_parameters() {
        let inst = reference_instance();
        assert_eq!(inst.n_units(), 10);
        assert_eq!(inst.hours(), 24);

        let u1 = &inst.units[0];
        assert_eq!(u1.no_load_cost, 1000.0);
        assert_eq!(u1.linear_cost, 16.19);
        assert_eq!(u1.quad_cost, 0.00048);
        assert_eq!(u1.p_max, 455.0);
        assert_eq!(u1.p_min, 150.0);
        assert_eq!(u1.min_up, 8);
        assert_eq!(u1.min_down, 8);
        assert_eq!(u1.ramp_up, 150.0);
        assert_eq!(u1.ramp_down, 150.0);

        let u10 = &inst.units[9];
        assert_eq!(u10.no_load_cost, 670.0);
        assert_eq!(u10.linear_cost, 27.79);
        assert_eq!(u10.quad_cost, 0.00173);
        assert_eq!(u10.p_max, 55.0);
        assert_eq!(u10.p_min, 10.0);
        assert_eq!(u10.min_up, 1);
        assert_eq!(u10.min_down, 1);

        assert_eq!(inst.total_capacity(), 1662.0);
        let peak = inst.load.demand.iter().cloned().fold(0.0, f64::max);
        assert!(peak <= inst.total_capacity());
    }

    #[test]
    fn scale_identity_and_duplication() {
        let base = reference_instance();
        let same = scale_instance(&base, 1).unwrap();
        assert_eq!(same, base);

        let doubled = scale_instance(&base, 2).unwrap();
        assert_eq!(doubled.n_units(), 20);
        // Copy-major: unit 0 and unit 10 are field-for-field equal.
        assert_eq!(doubled.units[0], doubled.units[10]);
        assert_eq!(doubled.units[3], doubled.units[13]);
        for t in 0..24 {
            assert_eq!(doubled.load.demand[t], 2.0 * base.load.demand[t]);
        }

        let big = scale_instance(&base, 100).unwrap();
        assert_eq!(big.n_units(), 1000);
        assert_eq!(big.load.demand[0], 100.0 * base.load.demand[0]);

        assert!(matches!(
            scale_instance(&base, 0),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn scaling_preserves_capacity_feasibility() {
        // max_t k·L_t·(1+r) <= k·Σ p_max follows from the base instance, and
        // `UcInstance::new` re-validates it for every k.
        let base = reference_instance();
        for k in [1, 2, 3, 7, 25] {
            scale_instance(&base, k).unwrap();
        }
    }

    #[test]
    fn evaluate_cost_single_unit_hours() {
        let inst = reference_instance();
        let mut sched = Schedule::all_off(10, 24);
        sched.set(0, 0, true);
        let mut power = vec![0.0; 240];
        power[0] = 150.0;
        let disp = DispatchSolution::from_power(&inst, &sched, power).unwrap();
        let cost = evaluate_cost(&inst, &sched, &disp).unwrap();
        assert!((cost - 3439.30).abs() < 1e-9, "got {cost}");

        let mut power = vec![0.0; 240];
        power[0] = 455.0;
        let disp = DispatchSolution::from_power(&inst, &sched, power).unwrap();
        let cost = evaluate_cost(&inst, &sched, &disp).unwrap();
        assert!((cost - 8465.82).abs() < 0.01, "got {cost}");
    }

    #[test]
    fn evaluate_cost_all_off_is_zero() {
        let inst = reference_instance();
        let sched = Schedule::all_off(10, 24);
        let disp = DispatchSolution::from_power(&inst, &sched, vec![0.0; 240]).unwrap();
        assert_eq!(evaluate_cost(&inst, &sched, &disp).unwrap(), 0.0);
    }

    #[test]
    fn evaluate_cost_rejects_dimension_mismatch() {
        let inst = reference_instance();
        let sched = Schedule::all_off(9, 24);
        let disp =
            DispatchSolution::from_power(&inst, &Schedule::all_off(10, 24), vec![0.0; 240]).unwrap();
        assert!(matches!(
            evaluate_cost(&inst, &sched, &disp),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn cost_additivity_under_duplication() {
        // A k-duplicated instance running the replicated solution costs
        // exactly k times the base solution.
        let base = reference_instance();
        let sched = Schedule::all_on(10, 24);
        let mut power = vec![0.0; 240];
        for i in 0..10 {
            for t in 0..24 {
                power[i * 24 + t] = base.units[i].p_min;
            }
        }
        let disp = DispatchSolution::from_power(&base, &sched, power.clone()).unwrap();
        let base_cost = evaluate_cost(&base, &sched, &disp).unwrap();

        for k in [2usize, 3] {
            let scaled = scale_instance(&base, k as u32).unwrap();
            let sched_k = Schedule::all_on(10 * k, 24);
            let mut power_k = vec![0.0; 10 * k * 24];
            for m in 0..k {
                power_k[m * 240..(m + 1) * 240].copy_from_slice(&power);
            }
            let disp_k = DispatchSolution::from_power(&scaled, &sched_k, power_k).unwrap();
            let cost_k = evaluate_cost(&scaled, &sched_k, &disp_k).unwrap();
            assert!(
                (cost_k - k as f64 * base_cost).abs() < 1e-7 * base_cost,
                "k={k}: {cost_k} vs {}",
                k as f64 * base_cost
            );
        }
    }

    #[test]
    fn cost_is_midpoint_convex_in_power() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let inst = reference_instance();
        let sched = Schedule::all_on(10, 24);
        for _ in 0..50 {
            let pa: Vec<f64> = (0..240).map(|_| rng.random_range(0.0..400.0)).collect();
            let pb: Vec<f64> = (0..240).map(|_| rng.random_range(0.0..400.0)).collect();
            let mid: Vec<f64> = pa.iter().zip(&pb).map(|(a, b)| 0.5 * (a + b)).collect();
            let ca = evaluate_cost(
                &inst,
                &sched,
                &DispatchSolution::from_power(&inst, &sched, pa).unwrap(),
            )
            .unwrap();
            let cb = evaluate_cost(
                &inst,
                &sched,
                &DispatchSolution::from_power(&inst, &sched, pb).unwrap(),
            )
            .unwrap();
            let cm = evaluate_cost(
                &inst,
                &sched,
                &DispatchSolution::from_power(&inst, &sched, mid).unwrap(),
            )
            .unwrap();
            assert!(cm <= 0.5 * (ca + cb) + 1e-9 * (1.0 + ca + cb));
        }
    }

    #[test]
    fn instance_json_round_trip() {
        let inst = reference_instance();
        let text = inst.to_json_string().unwrap();
        let back = UcInstance::from_json_str(&text).unwrap();
        assert_eq!(back, inst);
    }

    #[test]
    fn rejects_invalid_units() {
        let mut u = toy_unit();
        u.p_min = 200.0; // above p_max
        assert!(u.validate(0).is_err());

        let mut u = toy_unit();
        u.quad_cost = -1.0;
        assert!(u.validate(0).is_err());

        let mut u = toy_unit();
        u.min_up = 0;
        assert!(u.validate(0).is_err());
    }

    #[test]
    fn rejects_capacity_infeasible_instance() {
        let res = UcInstance::new(
            vec![toy_unit()],
            LoadProfile::new(vec![500.0], 0.0).unwrap(),
            vec![-2],
        );
        assert!(res.is_err());
    }
}
