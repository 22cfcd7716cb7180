//! Experiment harness around `mosp-core`: configuration layering, timed
//! runs with result files, and multi-run comparisons.

pub mod config;
pub mod harness;
pub mod report;

use std::fmt;

/// A solver result that breaks a library invariant. The binary maps it to
/// exit code 1; every other failure is treated as bad input (exit code 2).
#[derive(Debug)]
pub struct Breach(pub String);

impl fmt::Display for Breach {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "internal invariant breached: {}", self.0)
    }
}

impl std::error::Error for Breach {}

pub const EXIT_BREACH: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Exit code for an error returned by any command.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    if err.chain().any(|e| e.is::<Breach>()) {
        EXIT_BREACH
    } else {
        EXIT_USAGE
    }
}
