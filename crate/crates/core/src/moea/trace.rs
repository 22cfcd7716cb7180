use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::heuristics::{DestroyOp, RepairOp};

/// State after one iteration; iteration 0 is the initial population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub hv: f64,
    pub weights_destroy: [f64; 4],
    pub weights_repair: [f64; 4],
    pub archive_size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub destroy: Option<DestroyOp>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repair: Option<RepairOp>,
    #[serde(default)]
    pub scores_destroy: [f64; 4],
    #[serde(default)]
    pub scores_repair: [f64; 4],
    #[serde(default)]
    pub offspring: usize,
    #[serde(default)]
    pub accepted: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub records: Vec<IterationRecord>,
    /// Schedules built and scored during the run.
    pub evaluations: usize,
    /// Schedules seen with an objective outside `[0, 1]`.
    pub normalization_violations: usize,
}

impl RunTrace {
    pub fn final_hv(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.hv)
    }

    pub fn hv_series(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.hv).collect()
    }

    pub fn final_weights(&self) -> Option<([f64; 4], [f64; 4])> {
        self.records
            .last()
            .map(|r| (r.weights_destroy, r.weights_repair))
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut w, r)?;
            w.write_all(b"\n")?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(r: R) -> Result<Vec<IterationRecord>> {
        let mut out = Vec::new();
        for line in r.lines() {
            let line = line?;
            if !line.trim().is_empty() {
                out.push(serde_json::from_str(&line)?);
            }
        }
        Ok(out)
    }
}
