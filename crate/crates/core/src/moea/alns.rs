use log::{debug, warn};
use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;

use super::adaptive::AdaptiveLayer;
use super::pareto::{box_accept, distinct_indices, score_offspring, select_elites, update_elites, ParetoArchive};
use super::trace::{IterationRecord, RunTrace};
use super::{in_unit_range, SolverParams};
use crate::error::Result;
use crate::heuristics::{destroy, repair, rgha, select_targets, taboo_capacity, SearchState};
use crate::model::{Instance, Schedule};
use crate::objectives::Evaluator;
use crate::rng::{stream, SolverRng};

const STREAM_INIT: u64 = 1;
const STREAM_OPERATORS: u64 = 2;
const STREAM_BREED: u64 = 3;
const STREAM_SURVIVORS: u64 = 4;

/// How many construction attempts per slot before giving up on filling the
/// initial population with distinct solutions.
const INIT_ATTEMPTS_PER_SLOT: usize = 50;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Survivors {
    Nsga2,
    Random,
}

pub fn run_alns_nsga2(instance: &Instance, params: &SolverParams) -> Result<(ParetoArchive, RunTrace)> {
    run(instance, params, Survivors::Nsga2)
}

/// Control variant: survivors are drawn uniformly at random.
pub fn run_alns_rsm(instance: &Instance, params: &SolverParams) -> Result<(ParetoArchive, RunTrace)> {
    run(instance, params, Survivors::Random)
}

/// Distinct random greedy constructions, built in parallel batches but
/// accepted in attempt order.
pub(super) fn initial_population(eval: &Evaluator, params: &SolverParams, trace: &mut RunTrace) -> Vec<Schedule> {
    let cap = params.capacity();
    let max_attempts = INIT_ATTEMPTS_PER_SLOT * cap;
    let mut pool: Vec<Schedule> = Vec::with_capacity(cap);
    let mut points: Vec<[f64; 2]> = Vec::with_capacity(cap);
    let mut attempt = 0;
    while pool.len() < cap && attempt < max_attempts {
        let batch_end = (attempt + cap).min(max_attempts);
        let batch: Vec<Schedule> = (attempt..batch_end)
            .into_par_iter()
            .map(|a| {
                let mut rng = stream(params.seed, &[STREAM_INIT, a as u64]);
                let igt = select_targets(eval.instance(), params.rs, &mut rng);
                rgha(eval, &igt, &mut rng)
            })
            .collect();
        attempt = batch_end;
        for s in batch {
            trace.evaluations += 1;
            if !in_unit_range(s.objectives()) {
                trace.normalization_violations += 1;
            }
            if pool.len() >= cap {
                break;
            }
            points.push(s.objectives());
            if distinct_indices(&points).len() == points.len() {
                pool.push(s);
            } else {
                points.pop();
            }
        }
    }
    if pool.len() < cap {
        warn!(
            "only {} distinct initial solutions after {} attempts",
            pool.len(),
            max_attempts
        );
    }
    pool
}

fn random_survivors(pool: Vec<Schedule>, capacity: usize, rng: &mut SolverRng) -> ParetoArchive {
    let keep = capacity.min(pool.len());
    let mut idx = sample(rng, pool.len(), keep).into_vec();
    idx.sort_unstable();
    let mut slots: Vec<Option<Schedule>> = pool.into_iter().map(Some).collect();
    let members = idx.into_iter().filter_map(|i| slots[i].take()).collect();
    ParetoArchive::new(members, capacity)
}

fn record(iter: usize, archive: &ParetoArchive, layer: &AdaptiveLayer) -> IterationRecord {
    IterationRecord {
        iter,
        hv: archive.hypervolume(),
        weights_destroy: layer.destroy_weights,
        weights_repair: layer.repair_weights,
        archive_size: archive.len(),
        destroy: None,
        repair: None,
        scores_destroy: [0.0; 4],
        scores_repair: [0.0; 4],
        offspring: 0,
        accepted: 0,
    }
}

fn run(instance: &Instance, params: &SolverParams, survivors: Survivors) -> Result<(ParetoArchive, RunTrace)> {
    params.check(instance)?;
    let eval = Evaluator::new(instance, params.objective);
    let cap = params.capacity();
    let n = instance.n_targets();
    let bank = taboo_capacity(n, params.tr);
    let mut trace = RunTrace::default();
    let mut layer = AdaptiveLayer::new(params.lambda);

    let initial = initial_population(&eval, params, &mut trace);
    let mut archive = match survivors {
        Survivors::Nsga2 => select_elites(initial, cap),
        Survivors::Random => random_survivors(initial, cap, &mut stream(params.seed, &[STREAM_SURVIVORS, 0])),
    };
    trace.records.push(record(0, &archive, &layer));

    for iter in 1..=params.max_iter {
        let mut op_rng = stream(params.seed, &[STREAM_OPERATORS, iter as u64]);
        let d = layer.roulette_destroy(&mut op_rng);
        let r = layer.roulette_repair(&mut op_rng);
        let front = archive.front_points();

        let parents = &archive.members;
        let bred: Vec<(Schedule, f64, bool)> = (0..cap)
            .into_par_iter()
            .map(|k| {
                let mut rng = stream(params.seed, &[STREAM_BREED, iter as u64, k as u64]);
                let parent = &parents[rng.gen_range(0..parents.len())];
                // each destroy/repair cycle works on its own target subset
                let igt = select_targets(instance, params.rs, &mut rng);
                let mut state = SearchState::new(parent.clone(), igt, bank);
                destroy(&mut state, d, &eval, &mut rng);
                repair(&mut state, r, &eval, &mut rng);
                let child = state.solution;
                let f = child.objectives();
                (child, score_offspring(&f, &front), box_accept(&f, &front))
            })
            .collect();

        let mut pool = archive.members.clone();
        let mut accepted = 0;
        for (child, sigma, ok) in bred {
            trace.evaluations += 1;
            if !in_unit_range(child.objectives()) {
                trace.normalization_violations += 1;
            }
            layer.credit(d, r, sigma);
            if ok {
                accepted += 1;
                pool.push(child);
            }
        }
        let scores = (layer.destroy_scores, layer.repair_scores);

        archive = match survivors {
            Survivors::Nsga2 => update_elites(&archive, pool, cap),
            Survivors::Random => {
                random_survivors(pool, cap, &mut stream(params.seed, &[STREAM_SURVIVORS, iter as u64]))
            }
        };
        layer.update_weights();

        let mut rec = record(iter, &archive, &layer);
        rec.destroy = Some(d);
        rec.repair = Some(r);
        rec.scores_destroy = scores.0;
        rec.scores_repair = scores.1;
        rec.offspring = cap;
        rec.accepted = accepted;
        debug!("iter {iter}: {d} + {r}, accepted {accepted}, hv {:.6}", rec.hv);
        trace.records.push(rec);
    }
    Ok((archive, trace))
}
