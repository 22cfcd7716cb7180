//! Control solver: differential evolution over a real-valued genome with
//! NSGA-II survivor selection.
//!
//! Each target owns three genes in `[0, 1]`: whether to select it, which
//! candidate window to use, and where inside its visible window to begin.
//! Decoding visits targets in the construction heuristic's order and drops
//! any placement that clashes with what is already scheduled.

use rand::Rng;
use rayon::prelude::*;

use super::adaptive::AdaptiveLayer;
use super::pareto::{elite_indices_monotone, elite_indices, ParetoArchive};
use super::trace::{IterationRecord, RunTrace};
use super::{in_unit_range, SolverParams};
use crate::error::Result;
use crate::heuristics::{insert_at, rgha_order};
use crate::model::Schedule;
use crate::objectives::Evaluator;
use crate::rng::stream;

const GENES: usize = 3;
const STREAM_INIT: u64 = 11;
const STREAM_TRIAL: u64 = 12;

pub fn decode_genome(eval: &Evaluator, genome: &[f64]) -> Schedule {
    let inst = eval.instance();
    let all: Vec<usize> = (0..inst.n_targets()).collect();
    let mut s = Schedule::empty();
    for t in rgha_order(&all, inst) {
        let g = &genome[GENES * t..GENES * t + GENES];
        let target = &inst.targets[t];
        let k_max = target.candidate_ows.len();
        if g[0] <= 0.5 || k_max == 0 {
            continue;
        }
        let k = ((g[1] * k_max as f64) as usize).min(k_max - 1);
        let lo = target.vtw_begin_s;
        let hi = target.vtw_end_s - target.candidate_ows[k].span_s();
        if hi < lo {
            continue;
        }
        insert_at(eval, &mut s, t, k, lo + g[2] * (hi - lo));
    }
    eval.refresh(&mut s);
    s
}

struct Individual {
    genome: Vec<f64>,
    schedule: Schedule,
}

fn survivors(pool: Vec<Individual>, capacity: usize, previous: Option<&[[f64; 2]]>) -> Vec<Individual> {
    let points: Vec<[f64; 2]> = pool.iter().map(|i| i.schedule.objectives()).collect();
    let idx = match previous {
        Some(front) => elite_indices_monotone(&points, capacity, front),
        None => elite_indices(&points, capacity),
    };
    let mut slots: Vec<Option<Individual>> = pool.into_iter().map(Some).collect();
    idx.into_iter().filter_map(|i| slots[i].take()).collect()
}

fn archive_of(pop: &[Individual], capacity: usize) -> ParetoArchive {
    ParetoArchive::new(pop.iter().map(|i| i.schedule.clone()).collect(), capacity)
}

pub fn run_hcbmde_lite(
    instance: &crate::model::Instance,
    params: &SolverParams,
) -> Result<(ParetoArchive, RunTrace)> {
    params.check(instance)?;
    let eval = Evaluator::new(instance, params.objective);
    let cap = params.capacity();
    let len = GENES * instance.n_targets();
    let mut trace = RunTrace::default();
    let idle = AdaptiveLayer {
        destroy_weights: [0.0; 4],
        repair_weights: [0.0; 4],
        ..AdaptiveLayer::new(0.0)
    };

    let initial: Vec<Individual> = (0..cap)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(params.seed, &[STREAM_INIT, i as u64]);
            let genome: Vec<f64> = (0..len).map(|_| rng.gen()).collect();
            let schedule = decode_genome(&eval, &genome);
            Individual { genome, schedule }
        })
        .collect();
    trace.evaluations += initial.len();
    trace.normalization_violations += initial
        .iter()
        .filter(|i| !in_unit_range(i.schedule.objectives()))
        .count();
    let mut pop = survivors(initial, cap, None);
    let mut archive = archive_of(&pop, cap);
    let push = |trace: &mut RunTrace, iter: usize, archive: &ParetoArchive, offspring: usize| {
        trace.records.push(IterationRecord {
            iter,
            hv: archive.hypervolume(),
            weights_destroy: idle.destroy_weights,
            weights_repair: idle.repair_weights,
            archive_size: archive.len(),
            destroy: None,
            repair: None,
            scores_destroy: [0.0; 4],
            scores_repair: [0.0; 4],
            offspring,
            accepted: offspring,
        });
    };
    push(&mut trace, 0, &archive, 0);

    for iter in 1..=params.max_iter {
        let m = pop.len();
        let trials: Vec<Individual> = (0..m)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream(params.seed, &[STREAM_TRIAL, iter as u64, i as u64]);
                let pick = |rng: &mut crate::rng::SolverRng, taken: &[usize]| loop {
                    let c = rng.gen_range(0..m);
                    if m <= taken.len() || !taken.contains(&c) {
                        break c;
                    }
                };
                let r1 = pick(&mut rng, &[i]);
                let r2 = pick(&mut rng, &[i, r1]);
                let r3 = pick(&mut rng, &[i, r1, r2]);
                let (a, b, c) = (&pop[r1].genome, &pop[r2].genome, &pop[r3].genome);
                let forced = rng.gen_range(0..len.max(1));
                let genome: Vec<f64> = (0..len)
                    .map(|j| {
                        if j == forced || rng.gen::<f64>() < params.de_cr {
                            (a[j] + params.de_f * (b[j] - c[j])).clamp(0.0, 1.0)
                        } else {
                            pop[i].genome[j]
                        }
                    })
                    .collect();
                let schedule = decode_genome(&eval, &genome);
                Individual { genome, schedule }
            })
            .collect();
        trace.evaluations += trials.len();
        trace.normalization_violations += trials
            .iter()
            .filter(|i| !in_unit_range(i.schedule.objectives()))
            .count();
        let offspring = trials.len();
        let front = archive.front_points();
        let mut pool = pop;
        pool.extend(trials);
        pop = survivors(pool, cap, Some(&front));
        archive = archive_of(&pop, cap);
        push(&mut trace, iter, &archive, offspring);
    }
    Ok((archive, trace))
}
