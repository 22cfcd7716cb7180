//! Multi-run experiments: algorithm/partition comparisons and the λ sweep.

use std::path::Path;

use anyhow::Result;
use mosp_core::heuristics::{DestroyOp, RepairOp};
use mosp_core::metrics::{nondominated_points, summarize, Front, Summary, REFERENCE};
use mosp_core::model::PartitionMode;
use mosp_core::moea::{Algorithm, SolverParams};
use mosp_core::Instance;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::harness::{atomic_write, run_once, RunSummary};

/// Seed of restart `k` in a batch.
pub fn restart_seed(base: u64, k: usize) -> u64 {
    base + k as u64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub algorithm: Algorithm,
    pub partition: PartitionMode,
}

impl Cell {
    pub fn label(&self) -> String {
        format!("{}_{}", self.algorithm.name(), self.partition.name())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellRow {
    pub algorithm: String,
    pub partition: String,
    pub n: usize,
    pub hv_min: f64,
    pub hv_q1: f64,
    pub hv_median: f64,
    pub hv_q3: f64,
    pub hv_max: f64,
    pub hv_mean: f64,
    pub t_partition_median_s: f64,
    pub t_schedule_median_s: f64,
    pub t_wall_median_s: f64,
}

pub struct CellResult {
    pub cell: Cell,
    pub runs: Vec<RunSummary>,
    pub merged_front: Front,
}

impl CellResult {
    pub fn hv(&self) -> Summary {
        summarize(&self.runs.iter().map(|r| r.hv_x1000).collect::<Vec<_>>())
    }

    pub fn row(&self) -> CellRow {
        let hv = self.hv();
        let med = |f: fn(&RunSummary) -> f64| summarize(&self.runs.iter().map(f).collect::<Vec<_>>()).median;
        CellRow {
            algorithm: self.cell.algorithm.name().to_string(),
            partition: self.cell.partition.name().to_string(),
            n: hv.n,
            hv_min: hv.min,
            hv_q1: hv.q1,
            hv_median: hv.median,
            hv_q3: hv.q3,
            hv_max: hv.max,
            hv_mean: hv.mean,
            t_partition_median_s: med(|r| r.t_partition_s),
            t_schedule_median_s: med(|r| r.t_schedule_s),
            t_wall_median_s: med(|r| r.t_wall_s),
        }
    }
}

/// Runs every cell `restarts` times. With `parallel` the runs share the
/// worker pool; sequential runs give cleaner wall-clock timings.
pub fn compare(
    instance: &Instance,
    cells: &[Cell],
    base: &SolverParams,
    restarts: usize,
    parallel: bool,
) -> Result<Vec<CellResult>> {
    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..restarts).map(move |k| (c, k)))
        .collect();
    let one = |&(c, k): &(usize, usize)| {
        let params = SolverParams {
            partition_mode: cells[c].partition,
            seed: restart_seed(base.seed, k),
            ..*base
        };
        run_once(instance, cells[c].algorithm, &params).map(|o| (o.summary, o.front.points))
    };
    let outcomes: Vec<_> = if parallel {
        jobs.par_iter().map(one).collect::<Result<_>>()?
    } else {
        jobs.iter().map(one).collect::<Result<_>>()?
    };

    let mut results: Vec<CellResult> = cells
        .iter()
        .map(|&cell| CellResult {
            cell,
            runs: Vec::with_capacity(restarts),
            merged_front: Front::new(&[], REFERENCE),
        })
        .collect();
    let mut merged: Vec<Vec<[f64; 2]>> = vec![Vec::new(); cells.len()];
    for (&(c, _), (summary, points)) in jobs.iter().zip(outcomes) {
        results[c].runs.push(summary);
        merged[c].extend(points);
    }
    for (r, pts) in results.iter_mut().zip(merged) {
        r.merged_front = Front::new(&nondominated_points(&pts), REFERENCE);
    }
    Ok(results)
}

/// `hv_distribution.csv`, `runs.csv` and one merged front per cell under
/// `fronts/`.
pub fn write_comparison(dir: &Path, results: &[CellResult]) -> Result<()> {
    std::fs::create_dir_all(dir.join("fronts"))?;
    let mut rows = csv::Writer::from_writer(Vec::new());
    let mut runs = csv::Writer::from_writer(Vec::new());
    for r in results {
        rows.serialize(r.row())?;
        for s in &r.runs {
            runs.serialize(s)?;
        }
        let mut front = Vec::new();
        r.merged_front.write_csv(&mut front)?;
        atomic_write(&dir.join("fronts").join(format!("{}.csv", r.cell.label())), &front)?;
    }
    atomic_write(&dir.join("hv_distribution.csv"), &rows.into_inner()?)?;
    atomic_write(&dir.join("runs.csv"), &runs.into_inner()?)?;
    Ok(())
}

/// Operator labels in the column order of the sweep output.
pub fn operator_names() -> [String; 8] {
    let d = DestroyOp::ALL.map(|o| o.to_string());
    let r = RepairOp::ALL.map(|o| o.to_string());
    [
        d[0].clone(),
        d[1].clone(),
        d[2].clone(),
        d[3].clone(),
        r[0].clone(),
        r[1].clone(),
        r[2].clone(),
        r[3].clone(),
    ]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightSample {
    pub lambda: f64,
    pub restart: usize,
    pub seed: u64,
    pub operator: String,
    pub weight: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub operator: String,
    pub n: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
}

/// Final operator weights of ALNS+NSGA-II for every λ in `grid` and every
/// restart, plus their per-operator summaries.
pub fn sweep_lambda(
    instance: &Instance,
    grid: &[f64],
    base: &SolverParams,
    restarts: usize,
) -> Result<(Vec<SweepRow>, Vec<WeightSample>)> {
    let names = operator_names();
    let jobs: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|g| (0..restarts).map(move |k| (g, k)))
        .collect();
    let finals: Vec<[f64; 8]> = jobs
        .par_iter()
        .map(|&(g, k)| {
            let params = SolverParams {
                lambda: grid[g],
                seed: restart_seed(base.seed, k),
                ..*base
            };
            let out = run_once(instance, Algorithm::AlnsNsga2, &params)?;
            let (d, r) = out.trace.final_weights().unwrap_or(([0.25; 4], [0.25; 4]));
            Ok([d[0], d[1], d[2], d[3], r[0], r[1], r[2], r[3]])
        })
        .collect::<Result<_>>()?;

    let mut samples = Vec::with_capacity(jobs.len() * 8);
    for (&(g, k), w) in jobs.iter().zip(&finals) {
        for (name, &weight) in names.iter().zip(w) {
            samples.push(WeightSample {
                lambda: grid[g],
                restart: k,
                seed: restart_seed(base.seed, k),
                operator: name.clone(),
                weight,
            });
        }
    }
    let mut rows = Vec::with_capacity(grid.len() * 8);
    for (g, &lambda) in grid.iter().enumerate() {
        for (o, name) in names.iter().enumerate() {
            let ws: Vec<f64> = jobs
                .iter()
                .zip(&finals)
                .filter(|((gi, _), _)| *gi == g)
                .map(|(_, w)| w[o])
                .collect();
            let s = summarize(&ws);
            rows.push(SweepRow {
                lambda,
                operator: name.clone(),
                n: s.n,
                min: s.min,
                q1: s.q1,
                median: s.median,
                q3: s.q3,
                max: s.max,
                mean: s.mean,
            });
        }
    }
    Ok((rows, samples))
}

pub fn write_sweep(dir: &Path, rows: &[SweepRow], samples: &[WeightSample]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut summary = csv::Writer::from_writer(Vec::new());
    for r in rows {
        summary.serialize(r)?;
    }
    let mut raw = csv::Writer::from_writer(Vec::new());
    for s in samples {
        raw.serialize(s)?;
    }
    atomic_write(&dir.join("sweep_summary.csv"), &summary.into_inner()?)?;
    atomic_write(&dir.join("sweep_weights.csv"), &raw.into_inner()?)?;
    Ok(())
}

/// `start, start + step, ...` up to and including `end`.
pub fn lambda_grid(start: f64, end: f64, step: f64) -> Vec<f64> {
    let n = ((end - start) / step + 1e-9).floor() as usize;
    // rounding keeps 0.1 steps printable as 0.3 rather than 0.30000000000000004
    (0..=n).map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9).collect()
}
