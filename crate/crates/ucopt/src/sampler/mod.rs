//! Samplers: procedures that turn a binary model into candidate assignments
//! with energies.
//!
//! - [`solve_exhaustive`] enumerates every assignment (small models only) and
//!   is the exact oracle the heuristics are measured against;
//! - [`solve_sa`] runs restarted single-flip Metropolis annealing;
//! - [`solve_cqm`] handles constrained models by penalty compilation,
//!   sampling, exact feasibility filtering and analytic elimination of the
//!   cut-bounded cost variable;
//! - [`solve_remote`] ships a model to an annealing service over HTTP and
//!   re-verifies everything it returns.

mod cqm_solve;
mod exhaustive;
pub mod mock;
mod remote;
mod sa;

pub use cqm_solve::{solve_cqm, solve_cqm_exhaustive, CqmSolveOptions};
pub use exhaustive::solve_exhaustive;
pub use remote::{solve_remote, RemoteParams};
pub use sa::solve_sa;

use crate::error::{Error, Result};
use crate::qubo::Qubo;
use serde::{Deserialize, Serialize};

/// One sampled assignment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub assignment: Vec<u8>,
    pub energy: f64,
    /// Exact constraint re-check outcome; always true for unconstrained
    /// models.
    pub feasible: bool,
    /// How many independent reads produced this assignment.
    pub occurrences: u32,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    /// Time spent inside the solver itself.
    pub solve_ms: f64,
    /// Transport and queueing overhead (remote solves only).
    pub transport_ms: f64,
}

/// Sampler output: samples sorted by ascending energy (ties broken by
/// lexicographic assignment), merged multiplicities, and the seed that
/// produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub samples: Vec<Sample>,
    pub timing: Timing,
    pub seed: u64,
}

impl SampleSet {
    /// Sort, merge duplicates, and re-evaluate energies against `q`.
    pub(crate) fn assemble(
        mut samples: Vec<Sample>,
        q: &Qubo,
        timing: Timing,
        seed: u64,
    ) -> Result<SampleSet> {
        for s in &mut samples {
            s.energy = q.energy(&s.assignment)?;
        }
        samples.sort_by(|a, b| {
            a.energy
                .total_cmp(&b.energy)
                .then_with(|| a.assignment.cmp(&b.assignment))
        });
        samples.dedup_by(|second, first| {
            if second.assignment == first.assignment {
                first.occurrences += second.occurrences;
                true
            } else {
                false
            }
        });
        Ok(SampleSet {
            samples,
            timing,
            seed,
        })
    }

    pub fn best(&self) -> Option<&Sample> {
        self.samples.first()
    }

    pub fn best_energy(&self) -> Option<f64> {
        self.samples.first().map(|s| s.energy)
    }

    /// Check that every stored energy re-evaluates under `q` within `tol`.
    pub fn verify_energies(&self, q: &Qubo, tol: f64) -> Result<()> {
        for (idx, s) in self.samples.iter().enumerate() {
            let e = q.energy(&s.assignment)?;
            if (e - s.energy).abs() > tol {
                return Err(Error::Integrity {
                    sample_index: idx,
                    reported: s.energy,
                    recomputed: e,
                });
            }
        }
        Ok(())
    }
}

/// Annealing effort: `reads` independent restarts, each sweeping the
/// variables `sweeps` times over a geometric temperature ladder from `t_hot`
/// down to `t_cold`. Temperatures left unset are estimated from the model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnealSchedule {
    pub sweeps: usize,
    pub reads: usize,
    pub t_hot: Option<f64>,
    pub t_cold: Option<f64>,
}

impl AnnealSchedule {
    pub fn new(sweeps: usize, reads: usize) -> Result<Self> {
        let s = AnnealSchedule {
            sweeps,
            reads,
            t_hot: None,
            t_cold: None,
        };
        s.validate()?;
        Ok(s)
    }

    /// Default effort for a model: 100 sweeps per variable, 20 reads.
    /// Intended for small models; size the schedule explicitly for anything
    /// beyond a few dozen variables.
    pub fn default_for(q: &Qubo) -> Self {
        AnnealSchedule {
            sweeps: 100 * q.num_vars().max(1),
            reads: 20,
            t_hot: None,
            t_cold: None,
        }
    }

    pub fn with_temperatures(mut self, t_hot: f64, t_cold: f64) -> Result<Self> {
        self.t_hot = Some(t_hot);
        self.t_cold = Some(t_cold);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sweeps < 1 || self.reads < 1 {
            return Err(Error::invalid("schedule needs sweeps >= 1 and reads >= 1"));
        }
        if let (Some(h), Some(c)) = (self.t_hot, self.t_cold) {
            if !(h > c && c > 0.0) {
                return Err(Error::invalid(format!(
                    "temperature ladder needs t_hot > t_cold > 0, got {h} > {c}"
                )));
            }
        }
        Ok(())
    }
}
