//! End-to-end acceptance checks, one PASS/FAIL line per criterion.
//!
//! Everything runs inside a single test so the timing comparisons are not
//! disturbed by sibling tests competing for cores.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::BTreeSet;
use std::process::Command;

use mosp_cli::harness::{run_once, RunOutcome};
use mosp_core::feasibility::check_schedule;
use mosp_core::heuristics::{destroy, repair, rgha, select_targets, taboo_capacity, DestroyOp, RepairOp, SearchState};
use mosp_core::metrics::{hypervolume_of, summarize, REFERENCE};
use mosp_core::model::{Attitude, Instance, PartitionMode};
use mosp_core::moea::{fast_nondominated_sort, utilization, AdaptiveLayer, Algorithm, SolverParams, SIGMA};
use mosp_core::objectives::{instant_quality, sampled_quality, trans_time, Evaluator, ObjectiveParams};
use mosp_core::geometry::{apply_partition, attitude_at};
use mosp_core::rng::stream;
use rand::Rng;

const SEEDS: u64 = 20;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn criterion_1() -> Verdict {
    let cases = [
        (5.0, 35.0 / 3.0),
        (10.0, 35.0 / 3.0),
        (30.0, 25.0),
        (60.0, 40.0),
        (90.0, 52.0),
        (100.0, 166.0 / 3.0),
    ];
    let worst = cases
        .iter()
        .map(|&(dg, want)| (trans_time(dg).unwrap() - want).abs())
        .fold(0.0, f64::max);
    let jump = [10.0, 30.0, 60.0, 90.0]
        .iter()
        .map(|&b| (trans_time(b + 1e-9).unwrap() - trans_time(b).unwrap()).abs())
        .fold(0.0, f64::max);
    verdict(
        worst < 1e-9 && jump < 1e-6,
        format!("max error {worst:.1e}, max breakpoint jump {jump:.1e}"),
    )
}

fn criterion_2() -> Verdict {
    let exact = [((45.0, 0.0), 0.5), ((45.0, 45.0), 0.25), ((0.0, 0.0), 1.0)]
        .iter()
        .all(|&((p, r), q)| (instant_quality(p, r).unwrap() - q).abs() < 1e-15);

    let mut worst_const: f64 = 0.0;
    for &(p, r) in &[(0.0, 0.0), (12.5, -30.0), (-44.0, 44.0)] {
        let q = sampled_quality(&[(0.0, 7.3), (20.0, 31.0)], 1.0, |_, _| Attitude::new(p, r, 0.0)).unwrap();
        worst_const = worst_const.max((q - instant_quality(p, r).unwrap()).abs());
    }
    // passive windows of a generated instance hold their attitude per strip
    let mut inst = common::cd(50, 1);
    apply_partition(&mut inst, PartitionMode::Ato, &ObjectiveParams::default());
    for t in &inst.targets {
        let ow = t.candidate_ows[0].instantiate(t.vtw_begin_s);
        if ow.strips.len() == 1 {
            let a = attitude_at(&ow, 0, ow.strips[0].offset_s + t.vtw_begin_s).unwrap();
            let q = mosp_core::objectives::cumulative_quality(&t.candidate_ows[0], t.vtw_begin_s, 1.0).unwrap();
            worst_const = worst_const.max((q - instant_quality(a.pitch_deg, a.roll_deg).unwrap()).abs());
        }
    }

    let mut worst_refine: f64 = 0.0;
    for &(p0, dp, r0, dr) in &[(-40.0, 0.8, 10.0, 0.0), (30.0, -1.5, -20.0, 0.4), (-10.0, 0.63, 5.0, -0.2)] {
        let f = |_: usize, u: f64| Attitude::new(p0 + dp * u, r0 + dr * u, 0.0);
        let iv = [(0.0, 40.0), (47.0, 55.5)];
        let coarse = sampled_quality(&iv, 1.0, f).unwrap();
        let fine = sampled_quality(&iv, 0.1, f).unwrap();
        worst_refine = worst_refine.max((coarse - fine).abs());
    }
    verdict(
        exact && worst_const < 1e-9 && worst_refine < 1e-3,
        format!("instant values exact: {exact}; constant-attitude error {worst_const:.1e}; 1.0 s -> 0.1 s change {worst_refine:.1e}"),
    )
}

fn criterion_3() -> Verdict {
    let mut nds_ok = 0;
    for seed in 0..100u64 {
        let mut rng = stream(seed, &[3]);
        let n = rng.gen_range(1..=64);
        let pts: Vec<[f64; 2]> = (0..n)
            .map(|_| {
                if seed % 3 == 0 {
                    [rng.gen_range(0..6) as f64 / 5.0, rng.gen_range(0..6) as f64 / 5.0]
                } else {
                    [rng.gen(), rng.gen()]
                }
            })
            .collect();
        let oracle = common::peel_fronts(&pts);
        let mut got = vec![usize::MAX; n];
        for (r, f) in fast_nondominated_sort(&pts).iter().enumerate() {
            for &i in f {
                got[i] = r;
            }
        }
        if got == oracle {
            nds_ok += 1;
        }
    }
    let mut rng = stream(31, &[]);
    let mut small_err: f64 = 0.0;
    for _ in 0..1000 {
        let n = rng.gen_range(1..=3);
        let pts: Vec<[f64; 2]> = (0..n).map(|_| [rng.gen(), rng.gen()]).collect();
        let hv = hypervolume_of(&pts, REFERENCE).unwrap();
        small_err = small_err.max((hv - common::inclusion_exclusion(&pts, REFERENCE)).abs());
    }
    let mut mc_err: f64 = 0.0;
    for n in [5, 12, 20] {
        let pts: Vec<[f64; 2]> = (0..n).map(|_| [rng.gen(), rng.gen()]).collect();
        let samples = 1_000_000;
        let hits = (0..samples)
            .filter(|_| {
                let u: [f64; 2] = [rng.gen(), rng.gen()];
                pts.iter().any(|p| p[0] <= u[0] && p[1] <= u[1])
            })
            .count();
        let hv = hypervolume_of(&pts, REFERENCE).unwrap();
        mc_err = mc_err.max((hv - hits as f64 / samples as f64).abs());
    }
    verdict(
        nds_ok == 100 && small_err < 1e-12 && mc_err < 1e-2,
        format!("NDS {nds_ok}/100 match; inclusion-exclusion error {small_err:.1e}; Monte Carlo error {mc_err:.1e}"),
    )
}

fn criterion_4(norm_violations: &mut usize) -> Verdict {
    let p = ObjectiveParams::default();
    let mut checked = 0;
    let mut bad = Vec::new();
    let mut note = |s: &mosp_core::model::Schedule, inst: &Instance, what: String, bad: &mut Vec<String>| {
        let v = check_schedule(s, inst, &p).unwrap();
        let b = common::brute_force_violations(s, inst);
        if !v.is_empty() || !b.is_empty() {
            bad.push(format!("{what}: {} / {}", v.len(), b.len()));
        }
        if !(0.0..=1.0).contains(&s.f1) || !(0.0..=1.0).contains(&s.f2) {
            *norm_violations += 1;
        }
    };
    for k in 0..1000u64 {
        let inst = common::cd(50, k % 10);
        let eval = Evaluator::new(&inst, p);
        let mut rng = stream(k, &[4]);
        let igt = select_targets(&inst, 0.2, &mut rng);
        let s = rgha(&eval, &igt, &mut rng);
        note(&s, &inst, format!("rgha {k}"), &mut bad);
        checked += 1;
    }
    let inst = common::cd(50, 1);
    let eval = Evaluator::new(&inst, p);
    let cap = taboo_capacity(50, 0.2);
    for d in DestroyOp::ALL {
        for r in RepairOp::ALL {
            for seed in 0..100u64 {
                let mut rng = stream(seed, &[4, d.index() as u64, r.index() as u64]);
                let igt = select_targets(&inst, 0.2, &mut rng);
                let parent = rgha(&eval, &igt, &mut rng);
                let mut st = SearchState::new(parent, select_targets(&inst, 0.2, &mut rng), cap);
                destroy(&mut st, d, &eval, &mut rng);
                let bank: BTreeSet<usize> = st.taboo_bank.clone();
                repair(&mut st, r, &eval, &mut rng);
                note(&st.solution, &inst, format!("{d}+{r} seed {seed}"), &mut bad);
                if bank.iter().any(|&t| st.solution.contains_target(t)) {
                    bad.push(format!("{d}+{r} seed {seed}: taboo target reinserted"));
                }
                checked += 1;
            }
        }
    }
    let detail = match bad.first() {
        None => format!("{checked} schedules, zero violations"),
        Some(first) => format!("{} of {checked} schedules violate constraints, first: {first}", bad.len()),
    };
    verdict(bad.is_empty(), detail)
}

fn criterion_5(inst: &Instance, base: &SolverParams) -> Verdict {
    let params = SolverParams { lambda: 0.0, ..*base };
    let out = run_once(inst, Algorithm::AlnsNsga2, &params).unwrap();
    let frozen = out
        .trace
        .records
        .iter()
        .all(|r| r.weights_destroy == [0.25; 4] && r.weights_repair == [0.25; 4]);

    let mut layer = AdaptiveLayer::new(1.0);
    let credits = [(DestroyOp::Q, RepairOp::P, SIGMA[0]), (DestroyOp::E, RepairOp::P, SIGMA[1]), (DestroyOp::E, RepairOp::C, SIGMA[2])];
    for &(d, r, s) in &credits {
        layer.credit(d, r, s);
    }
    let (ds, rs) = (layer.destroy_scores, layer.repair_scores);
    layer.update_weights();
    let frac = |s: [f64; 4]| {
        let t: f64 = s.iter().sum();
        s.map(|x| x / t)
    };
    let exact = layer.destroy_weights == frac(ds) && layer.repair_weights == frac(rs);

    let worst = out
        .trace
        .records
        .iter()
        .flat_map(|r| [r.weights_destroy, r.weights_repair])
        .map(|w| (utilization(&w).iter().sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max);
    verdict(
        frozen && exact && worst < 1e-12,
        format!("lambda=0 weights frozen over {} iterations: {frozen}; lambda=1 update exact: {exact}; utilization sum error {worst:.1e}", params.max_iter),
    )
}

fn utilization_ok(runs: &[RunOutcome]) -> bool {
    runs.iter().all(|o| {
        o.trace.records.iter().all(|r| {
            [r.weights_destroy, r.weights_repair]
                .iter()
                .all(|w| (utilization(w).iter().sum::<f64>() - 1.0).abs() < 1e-12)
        })
    })
}

fn criterion_6(runs: &[RunOutcome]) -> Verdict {
    let mut drops = 0;
    for o in runs {
        drops += o.trace.hv_series().windows(2).filter(|w| w[1] < w[0]).count();
    }
    let iters: usize = runs.iter().map(|o| o.trace.records.len() - 1).sum();
    verdict(
        drops == 0 && runs.len() == SEEDS as usize && utilization_ok(runs),
        format!("{} runs, {iters} iterations, {drops} hypervolume decreases", runs.len()),
    )
}

fn hv_line(name: &str, runs: &[RunOutcome]) -> (f64, String) {
    let s = summarize(&runs.iter().map(|o| o.summary.hv_x1000).collect::<Vec<_>>());
    (
        s.median,
        format!("{name} hv x1000 min {:.1} q1 {:.1} median {:.1} q3 {:.1} max {:.1}", s.min, s.q1, s.median, s.q3, s.max),
    )
}

fn median_wall(runs: &[RunOutcome]) -> f64 {
    summarize(&runs.iter().map(|o| o.summary.t_wall_s).collect::<Vec<_>>()).median
}

fn criterion_7(nsga: &[RunOutcome], rsm: &[RunOutcome], de: &[RunOutcome]) -> Verdict {
    let (a, la) = hv_line("alns-nsga2", nsga);
    let (b, lb) = hv_line("alns-rsm", rsm);
    let (c, lc) = hv_line("hcbmde-lite", de);
    println!("    {la}\n    {lb}\n    {lc}");
    verdict(
        a >= b && a >= c,
        format!("median alns-nsga2 {a:.1} vs alns-rsm {b:.1} ({}) and hcbmde-lite {c:.1} ({})", a >= b, a >= c),
    )
}

fn criterion_8(ato: &[RunOutcome], complete: &[RunOutcome], envelope: &[RunOutcome]) -> Verdict {
    let (h_ato, la) = hv_line("ato", ato);
    let (h_com, lc) = hv_line("complete", complete);
    let (h_env, le) = hv_line("envelope", envelope);
    let (t_com, t_env) = (median_wall(complete), median_wall(envelope));
    println!("    {la}\n    {lc}\n    {le}");
    println!("    median wall s: ato {:.3} complete {t_com:.3} envelope {t_env:.3}", median_wall(ato));
    let hv_ok = h_ato <= h_com;
    let t_ok = t_env <= t_com;
    let env_ok = h_env >= h_ato;
    verdict(
        hv_ok && t_ok && env_ok,
        format!("ATO <= Complete HV: {hv_ok}; Envelope wall <= Complete wall: {t_ok}; Envelope HV >= ATO HV: {env_ok}"),
    )
}

fn criterion_9() -> Verdict {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let run = |args: &[&str]| {
        let out = Command::new(env!("CARGO_BIN_EXE_mosp")).args(args).current_dir(d).output().unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    };
    run(&["gen", "--dist", "cd", "--n", "50", "--seed", "1", "--out", "inst.json"]);
    let mut identical = 0;
    let mut total = 0;
    for alg in ["alns-nsga2", "alns-rsm", "hcbmde-lite"] {
        for rep in ["a", "b"] {
            run(&["solve", "--instance", "inst.json", "--algorithm", alg, "--seed", "7", "--max-iter", "40", "--out", &format!("{alg}_{rep}")]);
        }
        for file in ["front.csv", "trace.jsonl", "archive.json"] {
            let a = std::fs::read(d.join(format!("{alg}_a/{file}"))).unwrap();
            let b = std::fs::read(d.join(format!("{alg}_b/{file}"))).unwrap();
            total += 1;
            identical += usize::from(a == b);
        }
    }
    for rep in ["a", "b"] {
        run(&["compare", "--instance", "inst.json", "--restarts", "2", "--max-iter", "10", "--out", &format!("cmp_{rep}")]);
    }
    for alg in ["alns-nsga2", "alns-rsm", "hcbmde-lite"] {
        let f = format!("fronts/{alg}_envelope.csv");
        let a = std::fs::read(d.join("cmp_a").join(&f)).unwrap();
        let b = std::fs::read(d.join("cmp_b").join(&f)).unwrap();
        total += 1;
        identical += usize::from(a == b);
    }
    verdict(identical == total, format!("{identical}/{total} output files byte-identical across repeated runs"))
}

#[test]
fn acceptance() {
    let inst = common::cd(50, 1);
    let base = SolverParams::default();
    let mut results: Vec<(u8, &str, Verdict)> = Vec::new();
    let mut norm_violations = 0usize;

    results.push((1, "transition time", criterion_1()));
    results.push((2, "image quality", criterion_2()));
    results.push((3, "sorting and hypervolume oracles", criterion_3()));
    results.push((4, "feasibility fuzz", criterion_4(&mut norm_violations)));
    results.push((5, "adaptive layer", criterion_5(&inst, &base)));

    // configurations take turns per seed so that machine drift does not
    // bias the wall-clock comparison
    let configs = [
        (Algorithm::AlnsNsga2, PartitionMode::Envelope),
        (Algorithm::AlnsRsm, PartitionMode::Envelope),
        (Algorithm::HcbmdeLite, PartitionMode::Envelope),
        (Algorithm::AlnsNsga2, PartitionMode::Ato),
        (Algorithm::AlnsNsga2, PartitionMode::Complete),
    ];
    let mut by_config: Vec<Vec<RunOutcome>> = configs.iter().map(|_| Vec::new()).collect();
    for seed in 0..SEEDS {
        for (c, &(alg, mode)) in configs.iter().enumerate() {
            let p = SolverParams { seed, partition_mode: mode, ..base };
            by_config[c].push(run_once(&inst, alg, &p).expect("run failed"));
        }
    }
    let [nsga, rsm, de, ato, complete]: [Vec<RunOutcome>; 5] = by_config.try_into().ok().unwrap();

    results.push((6, "elitist monotonicity", criterion_6(&nsga)));
    results.push((7, "algorithm comparison", criterion_7(&nsga, &rsm, &de)));
    results.push((8, "partition comparison", criterion_8(&ato, &complete, &nsga)));
    results.push((9, "CLI determinism", criterion_9()));

    let all = [&nsga, &rsm, &de, &ato, &complete];
    let evaluated: usize = all.iter().flat_map(|r| r.iter()).map(|o| o.trace.evaluations).sum();
    norm_violations += all
        .iter()
        .flat_map(|r| r.iter())
        .map(|o| o.trace.normalization_violations)
        .sum::<usize>();
    let archive_out = all
        .iter()
        .flat_map(|r| r.iter())
        .flat_map(|o| o.archive.members.iter())
        .filter(|s| !(0.0..=1.0).contains(&s.f1) || !(0.0..=1.0).contains(&s.f2))
        .count();
    results.push((
        10,
        "objective normalization",
        verdict(
            norm_violations + archive_out == 0,
            format!("{evaluated} solver evaluations plus fuzz schedules, {} outside [0, 1]", norm_violations + archive_out),
        ),
    ));

    println!();
    for (id, name, v) in &results {
        println!("{} criterion {id:>2} {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
    }
    let failed: Vec<u8> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
