//! Run settings from a TOML file, layered under command-line flags.
//!
//! ```toml
//! [orbit]
//! altitude_km = 631.0
//!
//! [obj]
//! ea = 0.05
//!
//! [solver]
//! algorithm = "alns-nsga2"
//! partition = "envelope"
//! max_iter = 200
//! ```

use std::path::Path;

use anyhow::{Context, Result};
use mosp_core::geometry::PseudoOrbitModel;
use mosp_core::model::PartitionMode;
use mosp_core::moea::{Algorithm, SolverParams};
use mosp_core::objectives::ObjectiveParams;
use serde::Deserialize;

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub orbit: OrbitSection,
    #[serde(default)]
    pub obj: ObjSection,
    #[serde(default)]
    pub solver: SolverSection,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitSection {
    pub altitude_km: Option<f64>,
    pub ground_speed_km_s: Option<f64>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjSection {
    pub eo_a: Option<f64>,
    pub eo_p: Option<f64>,
    pub ea: Option<f64>,
    pub max_transition_s: Option<f64>,
    pub sample_step_s: Option<f64>,
}

/// Solver knobs. The same shape doubles as the set of command-line
/// overrides, so both layers merge field by field.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub algorithm: Option<String>,
    pub partition: Option<String>,
    pub ns: Option<usize>,
    pub na: Option<usize>,
    pub max_iter: Option<usize>,
    pub rs: Option<f64>,
    pub tr: Option<f64>,
    pub lambda: Option<f64>,
    pub seed: Option<u64>,
    pub restarts: Option<usize>,
    pub de_f: Option<f64>,
    pub de_cr: Option<f64>,
}

impl SolverSection {
    /// Fields set in `self` win over those in `lower`.
    pub fn over(&self, lower: &SolverSection) -> SolverSection {
        macro_rules! pick {
            ($($f:ident),*) => {
                SolverSection { $($f: self.$f.clone().or_else(|| lower.$f.clone())),* }
            };
        }
        pick!(algorithm, partition, ns, na, max_iter, rs, tr, lambda, seed, restarts, de_f, de_cr)
    }
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn load_opt(path: Option<&Path>) -> Result<Self> {
        path.map_or_else(|| Ok(Self::default()), Self::load)
    }

    pub fn orbit(&self) -> PseudoOrbitModel {
        let d = PseudoOrbitModel::default();
        PseudoOrbitModel {
            altitude_km: self.orbit.altitude_km.unwrap_or(d.altitude_km),
            ground_speed_km_s: self.orbit.ground_speed_km_s.unwrap_or(d.ground_speed_km_s),
        }
    }

    pub fn objective(&self) -> ObjectiveParams {
        let d = ObjectiveParams::default();
        let o = &self.obj;
        ObjectiveParams {
            eo_a: o.eo_a.unwrap_or(d.eo_a),
            eo_p: o.eo_p.unwrap_or(d.eo_p),
            ea: o.ea.unwrap_or(d.ea),
            max_transition_s: o.max_transition_s.unwrap_or(d.max_transition_s),
            sample_step_s: o.sample_step_s.unwrap_or(d.sample_step_s),
            ..d
        }
    }
}

/// Fully resolved settings for one solver configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub algorithm: Algorithm,
    pub params: SolverParams,
    pub restarts: usize,
}

impl RunConfig {
    /// Merges flags over the config file over the defaults. `fallback_mode`
    /// is used when neither layer names a partition mode.
    pub fn resolve(flags: &SolverSection, file: &FileConfig, fallback_mode: PartitionMode) -> Result<Self> {
        let s = flags.over(&file.solver);
        let d = SolverParams::default();
        let algorithm = match &s.algorithm {
            Some(a) => a.parse::<Algorithm>()?,
            None => Algorithm::AlnsNsga2,
        };
        let partition_mode = match &s.partition {
            Some(p) => p.parse::<PartitionMode>().map_err(anyhow::Error::msg)?,
            None => fallback_mode,
        };
        let restarts = s.restarts.unwrap_or(1);
        anyhow::ensure!(restarts >= 1, "restarts must be at least 1");
        let params = SolverParams {
            ns: s.ns.unwrap_or(d.ns),
            na: s.na.unwrap_or(d.na),
            max_iter: s.max_iter.unwrap_or(d.max_iter),
            rs: s.rs.unwrap_or(d.rs),
            tr: s.tr.unwrap_or(d.tr),
            lambda: s.lambda.unwrap_or(d.lambda),
            partition_mode,
            seed: s.seed.unwrap_or(d.seed),
            de_f: s.de_f.unwrap_or(d.de_f),
            de_cr: s.de_cr.unwrap_or(d.de_cr),
            objective: file.objective(),
        };
        Ok(Self {
            algorithm,
            params,
            restarts,
        })
    }
}
