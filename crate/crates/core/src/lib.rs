//! Bi-objective scheduling of multi-strip observations for an agile earth
//! observation satellite that can steer its attitude while imaging.
//!
//! The two objectives are the priority-weighted image quality loss and the
//! normalised energy consumption, both minimised. [`moea::solve`] runs the
//! ALNS+NSGA-II memetic search or one of its two control algorithms.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod feasibility;
pub mod geometry;
pub mod heuristics;
pub mod metrics;
pub mod model;
pub mod moea;
pub mod objectives;
pub mod rng;

pub use error::{MospError, Result};
pub use geometry::{apply_partition, generate_instance, InstanceSpec, PseudoOrbitModel};
pub use metrics::{extract_front, hypervolume, report_hv, Front};
pub use model::{Distribution, Instance, ObservationWay, PartitionMode, Schedule};
pub use moea::{solve, Algorithm, ParetoArchive, RunTrace, SolverParams};
pub use objectives::{Evaluator, ObjectiveParams};
