use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use mosp_core::metrics::Front;
use mosp_core::moea::{ParetoArchive, RunTrace};
use mosp_core::Instance;
use mosp_cli::harness::RunSummary;

fn mosp(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mosp"))
        .args(args)
        .current_dir(dir)
        .env("MOSP_THREADS", "2")
        .output()
        .unwrap()
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn gen(dir: &Path, n: &str) {
    ok(&mosp(&["gen", "--dist", "cd", "--n", n, "--seed", "1", "--out", "inst.json"], dir));
}

#[test]
fn gen_is_reproducible_and_loadable() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(&mosp(&["gen", "--dist", "cd", "--n", "50", "--seed", "1", "--out", "a.json"], d));
    ok(&mosp(&["gen", "--dist", "cd", "--n", "50", "--seed", "1", "--out", "b.json"], d));
    assert_eq!(fs::read(d.join("a.json")).unwrap(), fs::read(d.join("b.json")).unwrap());
    assert_eq!(Instance::load(&d.join("a.json")).unwrap().n_targets(), 50);
    ok(&mosp(&["gen", "--dist", "wd", "--n", "100", "--seed", "1", "--out", "w.json"], d));
    let w = Instance::load(&d.join("w.json")).unwrap();
    assert_eq!(w.n_targets(), 100);
}

#[test]
fn solve_writes_reparseable_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    gen(d, "30");
    ok(&mosp(&["solve", "--instance", "inst.json", "--max-iter", "10", "--seed", "4", "--out", "run"], d));
    let run = d.join("run");
    let summary: RunSummary = serde_json::from_str(&fs::read_to_string(run.join("summary.json")).unwrap()).unwrap();
    assert!(summary.t_partition_s + summary.t_schedule_s <= summary.t_wall_s);
    let front = Front::load(&run.join("front.csv")).unwrap();
    let archive: ParetoArchive = serde_json::from_str(&fs::read_to_string(run.join("archive.json")).unwrap()).unwrap();
    let trace = RunTrace::read_jsonl(fs::read(run.join("trace.jsonl")).unwrap().as_slice()).unwrap();
    assert_eq!(trace.len(), 11);
    assert!((trace.last().unwrap().hv * 1000.0 - summary.hv_x1000).abs() < 1e-9);
    assert_eq!(front.len(), mosp_core::extract_front(&archive).len());
    let v = mosp(&["validate", "--instance", "inst.json", "--archive", "run/archive.json"], d);
    ok(&v);
}

#[test]
fn zero_iterations_report_initial_elites() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    gen(d, "30");
    ok(&mosp(&["solve", "--instance", "inst.json", "--max-iter", "0", "--out", "run"], d));
    let trace = RunTrace::read_jsonl(fs::read(d.join("run/trace.jsonl")).unwrap().as_slice()).unwrap();
    assert_eq!(trace.len(), 1);
    assert_eq!(trace[0].iter, 0);
}

#[test]
fn config_file_sits_under_flags() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    gen(d, "20");
    fs::write(d.join("c.toml"), "[solver]\nmax_iter = 3\nalgorithm = \"alns-rsm\"\n").unwrap();
    ok(&mosp(&["solve", "--instance", "inst.json", "--config", "c.toml", "--out", "a"], d));
    ok(&mosp(&["solve", "--instance", "inst.json", "--config", "c.toml", "--max-iter", "2", "--out", "b"], d));
    let len = |p: &str| RunTrace::read_jsonl(fs::read(d.join(p)).unwrap().as_slice()).unwrap().len();
    assert_eq!(len("a/trace.jsonl"), 4);
    assert_eq!(len("b/trace.jsonl"), 3);
    let s: RunSummary = serde_json::from_str(&fs::read_to_string(d.join("a/summary.json")).unwrap()).unwrap();
    assert_eq!(s.algorithm, "alns-rsm");
}

#[test]
fn restarts_use_consecutive_seeds() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    gen(d, "20");
    ok(&mosp(
        &["solve", "--instance", "inst.json", "--max-iter", "2", "--seed", "10", "--restarts", "2", "--out", "r"],
        d,
    ));
    for (k, seed) in [(0, 10), (1, 11)] {
        let p = d.join(format!("r/run_{k:03}/summary.json"));
        let s: RunSummary = serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap();
        assert_eq!(s.seed, seed);
    }
}

#[test]
fn compare_emits_one_row_per_cell() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    gen(d, "20");
    ok(&mosp(&["compare", "--instance", "inst.json", "--restarts", "2", "--max-iter", "3", "--out", "cmp"], d));
    let rows = fs::read_to_string(d.join("cmp/hv_distribution.csv")).unwrap();
    assert_eq!(rows.lines().count(), 4);
    assert_eq!(fs::read_to_string(d.join("cmp/runs.csv")).unwrap().lines().count(), 7);
    for name in ["alns-nsga2", "alns-rsm", "hcbmde-lite"] {
        Front::load(&d.join(format!("cmp/fronts/{name}_envelope.csv"))).unwrap();
    }

    ok(&mosp(
        &[
            "compare", "--instance", "inst.json", "--algorithms", "alns-nsga2", "--partitions",
            "ato,nato,complete,envelope", "--max-iter", "2", "--out", "parts",
        ],
        d,
    ));
    let rows = fs::read_to_string(d.join("parts/hv_distribution.csv")).unwrap();
    assert_eq!(rows.lines().count(), 5);
    assert_eq!(fs::read_dir(d.join("parts/fronts")).unwrap().count(), 4);
}

#[test]
fn sweep_has_eight_operators_per_lambda() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    gen(d, "20");
    ok(&mosp(
        &["sweep-lambda", "--instance", "inst.json", "--restarts", "2", "--max-iter", "5", "--ns", "5", "--na", "5", "--out", "sw"],
        d,
    ));
    let summary = fs::read_to_string(d.join("sw/sweep_summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 1 + 11 * 8);

    ok(&mosp(
        &["sweep-lambda", "--instance", "inst.json", "--grid", "0", "--restarts", "3", "--max-iter", "5", "--out", "zero"],
        d,
    ));
    let mut rdr = csv::Reader::from_path(d.join("zero/sweep_weights.csv")).unwrap();
    let weights: Vec<f64> = rdr
        .records()
        .map(|r| r.unwrap()[4].parse::<f64>().unwrap())
        .collect();
    assert_eq!(weights.len(), 24);
    assert!(weights.iter().all(|&w| w == 0.25));
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let code = |o: Output| o.status.code().unwrap();
    assert_eq!(code(mosp(&["solve", "--instance", "missing.json", "--out", "x"], d)), 2);
    assert_eq!(code(mosp(&["gen", "--dist", "mars", "--n", "3", "--out", "x.json"], d)), 2);
    assert_eq!(code(mosp(&["frobnicate"], d)), 2);
    gen(d, "10");
    assert_eq!(code(mosp(&["solve", "--instance", "inst.json", "--rs", "1.5", "--out", "x"], d)), 2);
    assert_eq!(
        code(mosp(&["compare", "--instance", "inst.json", "--algorithms", "alns-nsga2", "--out", "x"], d)),
        2
    );

    // a tampered schedule fails validation
    ok(&mosp(&["solve", "--instance", "inst.json", "--max-iter", "1", "--out", "run"], d));
    let archive: ParetoArchive = serde_json::from_str(&fs::read_to_string(d.join("run/archive.json")).unwrap()).unwrap();
    let mut s = archive
        .members
        .into_iter()
        .find(|s| !s.is_empty())
        .unwrap();
    s.f1 = if s.f1 > 0.5 { s.f1 - 0.1 } else { s.f1 + 0.1 };
    fs::write(d.join("bad.json"), s.to_json().unwrap()).unwrap();
    assert_eq!(code(mosp(&["validate", "--instance", "inst.json", "--schedule", "bad.json"], d)), 1);
}
