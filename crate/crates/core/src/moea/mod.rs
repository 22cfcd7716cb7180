//! Multi-objective search: the ALNS+NSGA-II memetic solver and two controls.

mod adaptive;
mod alns;
mod de;
mod pareto;
mod trace;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{MospError, Result};
use crate::model::{Instance, PartitionMode};
use crate::objectives::ObjectiveParams;

pub use adaptive::{roulette, utilization, AdaptiveLayer};
pub use alns::{run_alns_nsga2, run_alns_rsm};
pub use de::{decode_genome, run_hcbmde_lite};
pub use pareto::{
    box_accept, crowded_order, crowding_distance, distinct_indices, dominates, elite_indices,
    elite_indices_monotone, fast_nondominated_sort, score_offspring, select_elites, update_elites,
    ParetoArchive, SIGMA,
};
pub use trace::{IterationRecord, RunTrace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    AlnsNsga2,
    AlnsRsm,
    HcbmdeLite,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::AlnsNsga2, Algorithm::AlnsRsm, Algorithm::HcbmdeLite];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::AlnsNsga2 => "alns-nsga2",
            Algorithm::AlnsRsm => "alns-rsm",
            Algorithm::HcbmdeLite => "hcbmde-lite",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = MospError;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| MospError::InvalidParameter(format!("unknown algorithm {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverParams {
    pub ns: usize,
    pub na: usize,
    pub max_iter: usize,
    /// Probability of leaving a target out of an initial construction.
    pub rs: f64,
    /// Taboo bank size as a fraction of the target count.
    pub tr: f64,
    pub lambda: f64,
    pub partition_mode: PartitionMode,
    pub seed: u64,
    pub de_f: f64,
    pub de_cr: f64,
    pub objective: ObjectiveParams,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            ns: 100,
            na: 100,
            max_iter: 200,
            rs: 0.2,
            tr: 0.2,
            lambda: 0.5,
            partition_mode: PartitionMode::Envelope,
            seed: 0,
            de_f: 0.5,
            de_cr: 0.9,
            objective: ObjectiveParams::default(),
        }
    }
}

impl SolverParams {
    pub fn capacity(&self) -> usize {
        self.ns + self.na
    }

    pub fn check(&self, instance: &Instance) -> Result<()> {
        let bad = |m: String| Err(MospError::InvalidParameter(m));
        if self.capacity() == 0 {
            return bad("NS + NA must be positive".into());
        }
        if !(0.0..1.0).contains(&self.rs) {
            return bad(format!("RS must lie in [0, 1), got {}", self.rs));
        }
        if !(0.0..=1.0).contains(&self.tr) {
            return bad(format!("TR must lie in [0, 1], got {}", self.tr));
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return bad(format!("lambda must lie in [0, 1], got {}", self.lambda));
        }
        if !(self.de_f > 0.0 && (0.0..=1.0).contains(&self.de_cr)) {
            return bad("DE needs F > 0 and CR in [0, 1]".into());
        }
        if !(self.objective.sample_step_s > 0.0) {
            return bad("quality sample step must be positive".into());
        }
        if instance.partition_mode != self.partition_mode {
            return Err(MospError::PartitionMismatch {
                expected: self.partition_mode,
                found: instance.partition_mode,
            });
        }
        if instance.targets.is_empty() {
            return bad("instance has no targets".into());
        }
        Ok(())
    }
}

/// Runs `algorithm` and returns its final elites and per-iteration trace.
pub fn solve(
    instance: &Instance,
    algorithm: Algorithm,
    params: &SolverParams,
) -> Result<(ParetoArchive, RunTrace)> {
    match algorithm {
        Algorithm::AlnsNsga2 => run_alns_nsga2(instance, params),
        Algorithm::AlnsRsm => run_alns_rsm(instance, params),
        Algorithm::HcbmdeLite => run_hcbmde_lite(instance, params),
    }
}

fn in_unit_range(f: [f64; 2]) -> bool {
    f.iter().all(|v| (0.0..=1.0).contains(v))
}
