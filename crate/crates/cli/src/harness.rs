use std::fs;
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use mosp_core::feasibility::check_schedule;
use mosp_core::metrics::{extract_front, report_hv, Front};
use mosp_core::moea::{solve, Algorithm, ParetoArchive, RunTrace, SolverParams};
use mosp_core::{apply_partition, Instance};
use serde::{Deserialize, Serialize};

use crate::Breach;

/// Timings and headline numbers of one run, as written to `summary.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSummary {
    pub algorithm: String,
    pub partition: String,
    pub seed: u64,
    pub hv_x1000: f64,
    pub t_partition_s: f64,
    pub t_schedule_s: f64,
    pub t_wall_s: f64,
    pub front_size: usize,
    pub evaluations: usize,
}

pub struct RunOutcome {
    pub archive: ParetoArchive,
    pub trace: RunTrace,
    pub front: Front,
    pub summary: RunSummary,
}

/// Partitions `instance` for `params.partition_mode`, solves it and checks
/// every returned schedule. A breached invariant is reported as [`Breach`].
pub fn run_once(instance: &Instance, algorithm: Algorithm, params: &SolverParams) -> Result<RunOutcome> {
    let wall = Instant::now();
    let mut inst = instance.clone();
    let t = Instant::now();
    apply_partition(&mut inst, params.partition_mode, &params.objective);
    let t_partition_s = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let (archive, trace) = solve(&inst, algorithm, params)?;
    let t_schedule_s = t.elapsed().as_secs_f64();

    verify(&inst, &archive, &trace, params)?;
    let front = extract_front(&archive);
    let hv_x1000 = report_hv(&front)?;
    let summary = RunSummary {
        algorithm: algorithm.name().to_string(),
        partition: params.partition_mode.name().to_string(),
        seed: params.seed,
        hv_x1000,
        t_partition_s,
        t_schedule_s,
        t_wall_s: wall.elapsed().as_secs_f64(),
        front_size: front.len(),
        evaluations: trace.evaluations,
    };
    Ok(RunOutcome {
        archive,
        trace,
        front,
        summary,
    })
}

fn verify(inst: &Instance, archive: &ParetoArchive, trace: &RunTrace, params: &SolverParams) -> Result<()> {
    if trace.normalization_violations > 0 {
        return Err(Breach(format!(
            "{} schedules had objectives outside [0, 1]",
            trace.normalization_violations
        ))
        .into());
    }
    for (i, s) in archive.members.iter().enumerate() {
        let v = check_schedule(s, inst, &params.objective)?;
        if let Some(first) = v.first() {
            return Err(Breach(format!("archive member {i} is infeasible: {first}")).into());
        }
    }
    Ok(())
}

/// Writes `front.csv`, `archive.json`, `trace.jsonl` and `summary.json`.
/// Each file goes to a temporary name first and is renamed into place.
pub fn write_run(dir: &Path, out: &RunOutcome) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut csv = Vec::new();
    out.front.write_csv(&mut csv)?;
    atomic_write(&dir.join("front.csv"), &csv)?;
    atomic_write(&dir.join("archive.json"), serde_json::to_string_pretty(&out.archive)?.as_bytes())?;
    let mut jsonl = Vec::new();
    out.trace.write_jsonl(&mut jsonl)?;
    atomic_write(&dir.join("trace.jsonl"), &jsonl)?;
    atomic_write(&dir.join("summary.json"), serde_json::to_string_pretty(&out.summary)?.as_bytes())?;
    Ok(())
}

pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}
