//! Constraint checking for candidate solutions.
//!
//! Violations are data, not errors: the checker returns one entry per broken
//! constraint with its location and magnitude, and an empty list means the
//! solution is feasible within `EPS_FEAS`.

use super::{DispatchSolution, Schedule, UcInstance, EPS_FEAS};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ViolationKind {
    /// `Σ_i p_{i,t} != L_t`.
    LoadBalance,
    /// `p` outside `[p_min·v, p_max·v]`.
    PowerBounds,
    /// Committed capacity below demand plus spinning reserve.
    Reserve,
    RampUp,
    RampDown,
    MinUpTime,
    MinDownTime,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Unit index, when the constraint is per-unit.
    pub unit: Option<usize>,
    /// Hour index (0-based), when the constraint is per-hour.
    pub hour: Option<usize>,
    /// Violation magnitude: MW for continuous constraints, hours for
    /// up/down-time constraints.
    pub magnitude: f64,
}

impl Violation {
    fn new(kind: ViolationKind, unit: Option<usize>, hour: Option<usize>, magnitude: f64) -> Self {
        Violation {
            kind,
            unit,
            hour,
            magnitude,
        }
    }
}

/// Check every operating constraint of `(sched, disp)` against `inst`.
///
/// Semantics:
/// - load balance, power bounds and reserve are checked per hour within
///   `EPS_FEAS`;
/// - ramp limits apply between consecutive committed hours; a start-up hour
///   is limited to `p <= p_min + RU` and the hour before a shut-down to
///   `p <= p_min + RD`; hour 0 has no ramp check against the pre-horizon
///   state;
/// - an on-run that ends inside the horizon must have lasted `min_up` hours
///   (counting pre-horizon on-hours for runs that started before hour 0), and
///   symmetrically for off-runs; runs still open at the end of the horizon
///   are not flagged.
pub fn check_feasibility(
    inst: &UcInstance,
    sched: &Schedule,
    disp: &DispatchSolution,
) -> Vec<Violation> {
    assert!(
        sched.matches(inst) && disp.powers().len() == inst.n_units() * inst.hours(),
        "dimensions must match the instance"
    );
    let (n, t_end) = (inst.n_units(), inst.hours());
    let mut out = Vec::new();

    // Load balance (per hour).
    for t in 0..t_end {
        let gen = disp.generation(t);
        let miss = (gen - inst.load.demand[t]).abs();
        if miss > EPS_FEAS {
            out.push(Violation::new(ViolationKind::LoadBalance, None, Some(t), miss));
        }
    }

    // Power bounds.
    for i in 0..n {
        let u = &inst.units[i];
        for t in 0..t_end {
            let p = disp.power(i, t);
            let (lo, hi) = if sched.on(i, t) {
                (u.p_min, u.p_max)
            } else {
                (0.0, 0.0)
            };
            if p < lo - EPS_FEAS || p > hi + EPS_FEAS {
                let mag = (lo - p).max(p - hi);
                out.push(Violation::new(ViolationKind::PowerBounds, Some(i), Some(t), mag));
            }
        }
    }

    // Spinning reserve.
    for t in 0..t_end {
        let cap = sched.committed_capacity(inst, t);
        let need = inst.load.required_capacity(t);
        if cap < need - EPS_FEAS {
            out.push(Violation::new(ViolationKind::Reserve, None, Some(t), need - cap));
        }
    }

    // Ramping with start-up/shut-down exceptions.
    for i in 0..n {
        let u = &inst.units[i];
        for t in 1..t_end {
            let prev_on = sched.on(i, t - 1);
            let now_on = sched.on(i, t);
            let p_prev = disp.power(i, t - 1);
            let p_now = disp.power(i, t);
            match (prev_on, now_on) {
                (true, true) => {
                    if p_now - p_prev > u.ramp_up + EPS_FEAS {
                        out.push(Violation::new(
                            ViolationKind::RampUp,
                            Some(i),
                            Some(t),
                            p_now - p_prev - u.ramp_up,
                        ));
                    }
                    if p_prev - p_now > u.ramp_down + EPS_FEAS {
                        out.push(Violation::new(
                            ViolationKind::RampDown,
                            Some(i),
                            Some(t),
                            p_prev - p_now - u.ramp_down,
                        ));
                    }
                }
                (false, true) => {
                    let cap = u.p_min + u.ramp_up;
                    if p_now > cap + EPS_FEAS {
                        out.push(Violation::new(
                            ViolationKind::RampUp,
                            Some(i),
                            Some(t),
                            p_now - cap,
                        ));
                    }
                }
                (true, false) => {
                    let cap = u.p_min + u.ramp_down;
                    if p_prev > cap + EPS_FEAS {
                        out.push(Violation::new(
                            ViolationKind::RampDown,
                            Some(i),
                            Some(t - 1),
                            p_prev - cap,
                        ));
                    }
                }
                (false, false) => {}
            }
        }
    }

    // Minimum up/down times.
    out.extend(up_down_violations(inst, sched));

    out
}

/// True when the commitment alone satisfies reserve coverage and minimum
/// up/down times; this is the feasible set of the binary master problem.
pub fn commitment_feasible(inst: &UcInstance, sched: &Schedule) -> bool {
    for t in 0..inst.hours() {
        if sched.committed_capacity(inst, t) < inst.load.required_capacity(t) - EPS_FEAS {
            return false;
        }
    }
    up_down_violations(inst, sched).is_empty()
}

fn up_down_violations(inst: &UcInstance, sched: &Schedule) -> Vec<Violation> {
    let (n, t_end) = (inst.n_units(), inst.hours());
    let mut out = Vec::new();
    for i in 0..n {
        let u = &inst.units[i];
        // Walk maximal runs. `credit` carries pre-horizon hours into a run
        // that continues the initial state.
        let init_on = inst.initially_on(i);
        let init_hours = inst.initial_status[i].unsigned_abs() as u64;
        let mut run_start = 0usize;
        let mut run_state = sched.on(i, 0);
        let mut credit = if run_state == init_on { init_hours } else { 0 };

        // A flip at hour 0 terminates the pre-horizon run.
        if run_state != init_on {
            if init_on && init_hours < u.min_up as u64 {
                out.push(Violation::new(
                    ViolationKind::MinUpTime,
                    Some(i),
                    Some(0),
                    (u.min_up as u64 - init_hours) as f64,
                ));
            }
            if !init_on && init_hours < u.min_down as u64 {
                out.push(Violation::new(
                    ViolationKind::MinDownTime,
                    Some(i),
                    Some(0),
                    (u.min_down as u64 - init_hours) as f64,
                ));
            }
        }

        for t in 1..=t_end {
            let state = if t < t_end { sched.on(i, t) } else { !run_state };
            if state != run_state {
                let run_len = (t - run_start) as u64 + credit;
                let terminated = t < t_end;
                if terminated {
                    if run_state && run_len < u.min_up as u64 {
                        out.push(Violation::new(
                            ViolationKind::MinUpTime,
                            Some(i),
                            Some(t - 1),
                            (u.min_up as u64 - run_len) as f64,
                        ));
                    }
                    if !run_state && run_len < u.min_down as u64 {
                        out.push(Violation::new(
                            ViolationKind::MinDownTime,
                            Some(i),
                            Some(t - 1),
                            (u.min_down as u64 - run_len) as f64,
                        ));
                    }
                }
                run_start = t;
                run_state = state;
                credit = 0;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{reference_instance, LoadProfile, Unit, UcInstance};

    fn two_unit_instance() -> UcInstance {
        let unit = |p_min: f64, p_max: f64| Unit {
            no_load_cost: 10.0,
            linear_cost: 5.0,
            quad_cost: 0.01,
            p_max,
            p_min,
            min_up: 1,
            min_down: 1,
            ramp_up: 1000.0,
            ramp_down: 1000.0,
        };
        UcInstance::new(
            vec![unit(10.0, 100.0), unit(10.0, 100.0)],
            LoadProfile::new(vec![120.0, 80.0, 120.0], 0.0).unwrap(),
            vec![-1, -1],
        )
        .unwrap()
    }

    #[test]
    fn feasible_solution_has_no_violations() {
        let inst = two_unit_instance();
        let sched = Schedule::all_on(2, 3);
        let power = vec![60.0, 40.0, 60.0, 60.0, 40.0, 60.0];
        let disp = DispatchSolution::from_power(&inst, &sched, power).unwrap();
        assert!(check_feasibility(&inst, &sched, &disp).is_empty());
    }

    #[test]
    fn load_balance_violation_reports_hour_and_magnitude() {
        let inst = two_unit_instance();
        let sched = Schedule::all_on(2, 3);
        // Hour 2 short by 5 MW.
        let power = vec![60.0, 40.0, 57.5, 60.0, 40.0, 57.5];
        let disp = DispatchSolution::from_power(&inst, &sched, power).unwrap();
        let v = check_feasibility(&inst, &sched, &disp);
        let bal: Vec<_> = v
            .iter()
            .filter(|x| x.kind == ViolationKind::LoadBalance)
            .collect();
        assert_eq!(bal.len(), 1);
        assert_eq!(bal[0].hour, Some(2));
        assert!((bal[0].magnitude - 5.0).abs() < 1e-9);
    }

    #[test]
    fn short_on_run_violates_min_up_time() {
        // Unit 0 of the reference system has an 8 hour minimum up time.
        let inst = reference_instance();
        let mut sched = Schedule::all_off(10, 24);
        sched.set(0, 4, true); // on one hour, off again
        for t in 0..24 {
            sched.set(1, t, true);
            sched.set(2, t, true);
        }
        let mut power = vec![0.0; 240];
        // Balance is irrelevant here; only the up-time check matters.
        power[4] = 150.0;
        let disp = DispatchSolution::from_power(&inst, &sched, power).unwrap();
        let v = check_feasibility(&inst, &sched, &disp);
        assert!(v
            .iter()
            .any(|x| x.kind == ViolationKind::MinUpTime && x.unit == Some(0)));
    }

    #[test]
    fn truncated_run_at_horizon_end_is_allowed() {
        let inst = reference_instance();
        let mut sched = Schedule::all_off(10, 24);
        // Unit 0 starts at hour 20 and runs through the end: only 4 of 8
        // hours fit, but the run is still open.
        for t in 20..24 {
            sched.set(0, t, true);
        }
        let disp = DispatchSolution::from_power(&inst, &sched, vec![0.0; 240]).unwrap();
        let v = check_feasibility(&inst, &sched, &disp);
        assert!(!v.iter().any(|x| x.kind == ViolationKind::MinUpTime));
    }

    #[test]
    fn initial_hours_count_toward_boundary_runs() {
        let mut inst = two_unit_instance();
        inst.units[0].min_down = 3;
        // Unit 0 has been off for one hour; keeping it off two more hours
        // serves the remaining down time, switching it on at hour 1 does not.
        inst.initial_status[0] = -1;

        let mut sched = Schedule::all_on(2, 3);
        sched.set(0, 0, false);
        let disp =
            DispatchSolution::from_power(&inst, &sched, vec![0.0, 65.0, 60.0, 120.0, 15.0, 60.0])
                .unwrap();
        let v = check_feasibility(&inst, &sched, &disp);
        assert!(v
            .iter()
            .any(|x| x.kind == ViolationKind::MinDownTime && x.unit == Some(0)));

        // Switching on at hour 0 terminates the pre-horizon off-run early.
        let sched = Schedule::all_on(2, 3);
        let disp = DispatchSolution::from_power(
            &inst,
            &sched,
            vec![60.0, 40.0, 60.0, 60.0, 40.0, 60.0],
        )
        .unwrap();
        let v = check_feasibility(&inst, &sched, &disp);
        assert!(v
            .iter()
            .any(|x| x.kind == ViolationKind::MinDownTime && x.hour == Some(0)));
    }

    #[test]
    fn ramp_exceptions_at_start_up_and_shut_down() {
        let mut inst = two_unit_instance();
        inst.units[0].ramp_up = 30.0;
        inst.units[0].ramp_down = 30.0;

        // Start-up hour may reach p_min + RU = 40, not more.
        let mut sched = Schedule::all_on(2, 3);
        sched.set(0, 0, false);
        let disp =
            DispatchSolution::from_power(&inst, &sched, vec![0.0, 41.0, 60.0, 120.0, 39.0, 60.0])
                .unwrap();
        let v = check_feasibility(&inst, &sched, &disp);
        assert!(v
            .iter()
            .any(|x| x.kind == ViolationKind::RampUp && x.unit == Some(0) && x.hour == Some(1)));

        // Within limit: no ramp violation.
        let disp =
            DispatchSolution::from_power(&inst, &sched, vec![0.0, 40.0, 60.0, 120.0, 40.0, 60.0])
                .unwrap();
        let v = check_feasibility(&inst, &sched, &disp);
        assert!(!v.iter().any(|x| x.kind == ViolationKind::RampUp));
    }

    #[test]
    fn reserve_violation_when_capacity_short() {
        let mut inst = two_unit_instance();
        inst.load.reserve_fraction = 0.2;
        let mut sched = Schedule::all_on(2, 3);
        sched.set(1, 0, false);
        // Hour 0 requires 120·1.2 = 144 > 100 committed.
        let disp = DispatchSolution::from_power(
            &inst,
            &sched,
            vec![100.0, 40.0, 60.0, 0.0, 40.0, 60.0],
        )
        .unwrap();
        let v = check_feasibility(&inst, &sched, &disp);
        assert!(v
            .iter()
            .any(|x| x.kind == ViolationKind::Reserve && x.hour == Some(0)));
    }
}
