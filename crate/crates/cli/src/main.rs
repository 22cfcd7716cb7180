use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use mosp_core::feasibility::check_schedule;
use mosp_core::geometry::{generate_instance, InstanceSpec};
use mosp_core::model::{recompute_objectives, validate_instance, Distribution, PartitionMode, Schedule};
use mosp_core::moea::{Algorithm, ParetoArchive};
use mosp_core::Instance;
use mosp_cli::config::{FileConfig, RunConfig, SolverSection};
use mosp_cli::harness::{run_once, write_run};
use mosp_cli::report::{compare, lambda_grid, restart_seed, sweep_lambda, write_comparison, write_sweep, Cell};
use mosp_cli::{exit_code, Breach};

#[derive(Parser)]
#[command(name = "mosp", version, about = "Multi-strip observation scheduling for agile imaging satellites")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random instance.
    Gen(GenArgs),
    /// Solve an instance and write its front, archive, trace and summary.
    Solve(SolveArgs),
    /// Run several algorithm/partition cells over restarts and summarise HV.
    Compare(CompareArgs),
    /// Final operator weights of ALNS+NSGA-II across a grid of λ values.
    SweepLambda(SweepArgs),
    /// Check an instance, and optionally schedules, against every constraint.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_parser = parse_dist)]
    dist: Distribution,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Candidate window set to build.
    #[arg(long, value_parser = parse_partition, default_value = "envelope")]
    partition: PartitionMode,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

/// Solver settings; unset flags fall back to the config file, then defaults.
#[derive(Args, Default)]
struct SolverFlags {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    ns: Option<usize>,
    #[arg(long)]
    na: Option<usize>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    rs: Option<f64>,
    #[arg(long)]
    tr: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    /// Seed of the first restart; restart k uses seed + k.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    de_f: Option<f64>,
    #[arg(long)]
    de_cr: Option<f64>,
}

impl SolverFlags {
    fn section(&self, algorithm: Option<&str>, partition: Option<&str>) -> SolverSection {
        SolverSection {
            algorithm: algorithm.map(str::to_string),
            partition: partition.map(str::to_string),
            ns: self.ns,
            na: self.na,
            max_iter: self.max_iter,
            rs: self.rs,
            tr: self.tr,
            lambda: self.lambda,
            seed: self.seed,
            restarts: self.restarts,
            de_f: self.de_f,
            de_cr: self.de_cr,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    /// alns-nsga2, alns-rsm or hcbmde-lite.
    #[arg(long)]
    algorithm: Option<String>,
    /// ato, nato, complete or envelope; defaults to the instance's own set.
    #[arg(long)]
    partition: Option<String>,
    #[command(flatten)]
    solver: SolverFlags,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Comma-separated algorithms; all three when omitted.
    #[arg(long, value_delimiter = ',')]
    algorithms: Vec<String>,
    /// Comma-separated partition modes; the configured one when omitted.
    #[arg(long, value_delimiter = ',')]
    partitions: Vec<String>,
    /// Run one job at a time, for undisturbed timings.
    #[arg(long)]
    sequential: bool,
    #[command(flatten)]
    solver: SolverFlags,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Explicit comma-separated λ values; overrides the start/end/step grid.
    #[arg(long, value_delimiter = ',')]
    grid: Vec<f64>,
    #[arg(long, default_value_t = 0.0)]
    start: f64,
    #[arg(long, default_value_t = 1.0)]
    end: f64,
    #[arg(long, default_value_t = 0.1)]
    step: f64,
    #[arg(long)]
    partition: Option<String>,
    #[command(flatten)]
    solver: SolverFlags,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    instance: PathBuf,
    /// A schedule JSON file.
    #[arg(long)]
    schedule: Vec<PathBuf>,
    /// An archive JSON file written by `solve`.
    #[arg(long)]
    archive: Vec<PathBuf>,
}

fn parse_dist(s: &str) -> std::result::Result<Distribution, String> {
    s.parse()
}

fn parse_partition(s: &str) -> std::result::Result<PartitionMode, String> {
    s.parse()
}

fn load_instance(path: &Path) -> Result<Instance> {
    Instance::load(path).with_context(|| format!("loading instance {}", path.display()))
}

fn cmd_gen(a: &GenArgs) -> Result<()> {
    let file = FileConfig::load_opt(a.config.as_deref())?;
    let spec = InstanceSpec {
        orbit: file.orbit(),
        partition_mode: a.partition,
        ..InstanceSpec::new(a.dist, a.n, a.seed)
    };
    let inst = generate_instance(&spec)?;
    inst.save(&a.out).with_context(|| format!("writing {}", a.out.display()))?;
    let lens: Vec<f64> = inst.targets.iter().map(|t| t.vtw_len_s()).collect();
    let s = mosp_core::metrics::summarize(&lens);
    let windows: usize = inst.targets.iter().map(|t| t.candidate_ows.len()).sum();
    println!(
        "{} targets ({:?}, seed {}), {} candidate windows [{}]",
        inst.n_targets(),
        inst.distribution,
        inst.seed,
        windows,
        inst.partition_mode
    );
    println!("VTW length s: min {:.2} median {:.2} mean {:.2} max {:.2}", s.min, s.median, s.mean, s.max);
    Ok(())
}

fn cmd_solve(a: &SolveArgs) -> Result<()> {
    let inst = load_instance(&a.instance)?;
    let file = FileConfig::load_opt(a.solver.config.as_deref())?;
    let flags = a.solver.section(a.algorithm.as_deref(), a.partition.as_deref());
    let rc = RunConfig::resolve(&flags, &file, inst.partition_mode)?;
    for k in 0..rc.restarts {
        let params = mosp_core::SolverParams {
            seed: restart_seed(rc.params.seed, k),
            ..rc.params
        };
        let out = run_once(&inst, rc.algorithm, &params)?;
        let dir = if rc.restarts == 1 {
            a.out.clone()
        } else {
            a.out.join(format!("run_{k:03}"))
        };
        write_run(&dir, &out)?;
        let s = &out.summary;
        println!(
            "{} [{}] seed {}: hv x1000 {:.3}, front {}, t_p {:.3}s t_s {:.3}s t_w {:.3}s",
            s.algorithm, s.partition, s.seed, s.hv_x1000, s.front_size, s.t_partition_s, s.t_schedule_s, s.t_wall_s
        );
    }
    Ok(())
}

fn cmd_compare(a: &CompareArgs) -> Result<()> {
    let inst = load_instance(&a.instance)?;
    let file = FileConfig::load_opt(a.solver.config.as_deref())?;
    let rc = RunConfig::resolve(&a.solver.section(None, None), &file, inst.partition_mode)?;
    let algorithms: Vec<Algorithm> = if a.algorithms.is_empty() {
        Algorithm::ALL.to_vec()
    } else {
        a.algorithms.iter().map(|s| s.parse()).collect::<mosp_core::Result<_>>()?
    };
    let partitions: Vec<PartitionMode> = if a.partitions.is_empty() {
        vec![rc.params.partition_mode]
    } else {
        a.partitions
            .iter()
            .map(|s| s.parse().map_err(anyhow::Error::msg))
            .collect::<Result<_>>()?
    };
    let cells: Vec<Cell> = algorithms
        .iter()
        .flat_map(|&algorithm| partitions.iter().map(move |&partition| Cell { algorithm, partition }))
        .collect();
    if cells.len() < 2 {
        bail!("compare needs at least two algorithm/partition cells");
    }
    let results = compare(&inst, &cells, &rc.params, rc.restarts, !a.sequential)?;
    write_comparison(&a.out, &results)?;
    for r in &results {
        let row = r.row();
        println!(
            "{:<12} {:<9} n {:>3}  hv x1000 median {:.3} [{:.3}, {:.3}]  t_w median {:.3}s",
            row.algorithm, row.partition, row.n, row.hv_median, row.hv_min, row.hv_max, row.t_wall_median_s
        );
    }
    Ok(())
}

fn cmd_sweep(a: &SweepArgs) -> Result<()> {
    let inst = load_instance(&a.instance)?;
    let file = FileConfig::load_opt(a.solver.config.as_deref())?;
    let rc = RunConfig::resolve(&a.solver.section(None, a.partition.as_deref()), &file, inst.partition_mode)?;
    let grid = if a.grid.is_empty() {
        if a.step.is_nan() || a.step <= 0.0 {
            bail!("step must be positive");
        }
        lambda_grid(a.start, a.end, a.step)
    } else {
        a.grid.clone()
    };
    if let Some(bad) = grid.iter().find(|l| !(0.0..=1.0).contains(*l)) {
        bail!("λ values must lie in [0, 1], got {bad}");
    }
    let (rows, samples) = sweep_lambda(&inst, &grid, &rc.params, rc.restarts)?;
    write_sweep(&a.out, &rows, &samples)?;
    println!("{} λ values x {} restarts -> {} summary rows", grid.len(), rc.restarts, rows.len());
    Ok(())
}

fn cmd_validate(a: &ValidateArgs) -> Result<()> {
    let inst = load_instance(&a.instance)?;
    let params = mosp_core::ObjectiveParams::default();
    let mut problems = Vec::new();
    for v in validate_instance(&inst) {
        problems.push(format!("instance: {v}"));
    }
    let mut schedules: Vec<(String, Schedule)> = Vec::new();
    for p in &a.schedule {
        let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        schedules.push((p.display().to_string(), Schedule::from_json(&text)?));
    }
    for p in &a.archive {
        let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        let archive: ParetoArchive = serde_json::from_str(&text)?;
        for (i, s) in archive.members.into_iter().enumerate() {
            schedules.push((format!("{} member {i}", p.display()), s));
        }
    }
    for (name, s) in &schedules {
        for v in check_schedule(s, &inst, &params)? {
            problems.push(format!("{name}: {v}"));
        }
        let fresh = recompute_objectives(s, &inst, &params)?;
        if (fresh.f1 - s.f1).abs() > 1e-9 || (fresh.f2 - s.f2).abs() > 1e-9 {
            problems.push(format!(
                "{name}: stored objectives ({}, {}) differ from recomputed ({}, {})",
                s.f1, s.f2, fresh.f1, fresh.f2
            ));
        }
    }
    for p in &problems {
        println!("{p}");
    }
    if !problems.is_empty() {
        return Err(Breach(format!("{} violations", problems.len())).into());
    }
    println!("ok: instance with {} targets, {} schedules checked", inst.n_targets(), schedules.len());
    Ok(())
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("MOSP_THREADS") {
        let n: usize = v.parse().with_context(|| format!("MOSP_THREADS must be a positive integer, got {v:?}"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = init_threads().and_then(|()| match &cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Compare(a) => cmd_compare(a),
        Command::SweepLambda(a) => cmd_sweep(a),
        Command::Validate(a) => cmd_validate(a),
    });
    if let Err(e) = result {
        eprintln!("error: {e:#}");
        std::process::exit(exit_code(&e));
    }
}
