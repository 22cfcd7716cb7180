//! Construction heuristic, target sampling and the destroy/repair operators.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::model::{Assignment, Attitude, Instance, Schedule};
use crate::objectives::{delta_g, transition_s, Evaluator, ObjectiveParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DestroyOp {
    R,
    Q,
    E,
    C,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RepairOp {
    R,
    P,
    L,
    C,
}

impl DestroyOp {
    pub const ALL: [DestroyOp; 4] = [DestroyOp::R, DestroyOp::Q, DestroyOp::E, DestroyOp::C];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl RepairOp {
    pub const ALL: [RepairOp; 4] = [RepairOp::R, RepairOp::P, RepairOp::L, RepairOp::C];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for DestroyOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}-Destroy", self)
    }
}

impl fmt::Display for RepairOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}-Repair", self)
    }
}

/// A solution under a destroy/repair cycle.
///
/// `unscheduled` holds the candidate targets not in the solution and
/// `taboo_bank` the targets removed during this cycle, which repair skips.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchState {
    pub solution: Schedule,
    pub taboo_bank: BTreeSet<usize>,
    pub unscheduled: BTreeSet<usize>,
    pub capacity: usize,
}

impl SearchState {
    pub fn new(solution: Schedule, targets: impl IntoIterator<Item = usize>, capacity: usize) -> Self {
        let unscheduled = targets
            .into_iter()
            .filter(|&t| !solution.contains_target(t))
            .collect();
        Self {
            solution,
            taboo_bank: BTreeSet::new(),
            unscheduled,
            capacity,
        }
    }
}

pub fn taboo_capacity(n_targets: usize, tr: f64) -> usize {
    (tr * n_targets as f64).ceil() as usize
}

/// Keeps each target independently when a uniform draw exceeds `rs`.
pub fn select_targets<R: Rng>(instance: &Instance, rs: f64, rng: &mut R) -> Vec<usize> {
    (0..instance.n_targets())
        .filter(|_| rng.gen::<f64>() > rs)
        .collect()
}

/// Inserts candidate window `ow_index` of `target_index` at `begin_s` if it
/// fits between its would-be neighbours. Objectives are left stale.
pub fn insert_at(
    eval: &Evaluator,
    solution: &mut Schedule,
    target_index: usize,
    ow_index: usize,
    begin_s: f64,
) -> bool {
    if solution.contains_target(target_index) {
        return false;
    }
    let a = eval.observe(target_index, ow_index, begin_s);
    let list = &solution.assignments;
    let pos = list.partition_point(|x| x.begin_s < begin_s);
    if pos > 0 {
        let prev = &list[pos - 1];
        if begin_s - prev.end_s < slew(&prev.end_attitude, &a.begin_attitude) {
            return false;
        }
    }
    if let Some(next) = list.get(pos) {
        if next.begin_s <= begin_s || next.begin_s - a.end_s < slew(&a.end_attitude, &next.begin_attitude) {
            return false;
        }
    }
    solution.assignments.insert(pos, a);
    true
}

fn slew(from: &Attitude, to: &Attitude) -> f64 {
    transition_s(delta_g(from, to))
}

/// One placement attempt: a random candidate window at a random begin moment
/// that keeps it inside the visible window. Abandons the target if that
/// placement clashes with a neighbour.
pub fn try_insert<R: Rng>(
    eval: &Evaluator,
    solution: &mut Schedule,
    target_index: usize,
    rng: &mut R,
) -> bool {
    let target = &eval.instance().targets[target_index];
    if target.candidate_ows.is_empty() || solution.contains_target(target_index) {
        return false;
    }
    let k = rng.gen_range(0..target.candidate_ows.len());
    let span = target.candidate_ows[k].span_s();
    let lo = target.vtw_begin_s;
    let hi = target.vtw_end_s - span;
    if hi < lo {
        return false;
    }
    let begin = if hi > lo { rng.gen_range(lo..=hi) } else { lo };
    insert_at(eval, solution, target_index, k, begin)
}

/// Visiting order of the construction heuristic: priority descending, then
/// target index.
pub fn rgha_order(targets: &[usize], instance: &Instance) -> Vec<usize> {
    let mut order = targets.to_vec();
    order.sort_by(|&a, &b| {
        instance.targets[b]
            .priority
            .cmp(&instance.targets[a].priority)
            .then(a.cmp(&b))
    });
    order
}

/// Random greedy construction over the targets in `igt`.
pub fn rgha<R: Rng>(eval: &Evaluator, igt: &[usize], rng: &mut R) -> Schedule {
    let mut s = Schedule::empty();
    for t in rgha_order(igt, eval.instance()) {
        try_insert(eval, &mut s, t, rng);
    }
    eval.refresh(&mut s);
    s
}

/// Energy of observing one target in isolation, slewing in from and back to
/// the reference attitude.
pub fn guiding_energy(a: &Assignment, params: &ObjectiveParams) -> f64 {
    params.imaging_rate(a.way) * a.imaging_s
        + params.ea
            * (slew(&Attitude::ORIGIN, &a.begin_attitude) + slew(&a.end_attitude, &Attitude::ORIGIN))
}

fn by_key_then_index(mut items: Vec<(f64, usize)>) -> Vec<usize> {
    items.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal).then(a.1.cmp(&b.1)));
    items.into_iter().map(|(_, t)| t).collect()
}

/// Order in which `op` removes the scheduled targets.
pub fn destroy_order<R: Rng>(
    solution: &Schedule,
    op: DestroyOp,
    eval: &Evaluator,
    rng: &mut R,
) -> Vec<usize> {
    let inst = eval.instance();
    let keyed = |key: &dyn Fn(&Assignment) -> f64| {
        by_key_then_index(
            solution
                .assignments
                .iter()
                .map(|a| (key(a), a.target_index))
                .collect(),
        )
    };
    match op {
        DestroyOp::R => {
            let mut order: Vec<usize> = solution.assignments.iter().map(|a| a.target_index).collect();
            order.sort_unstable();
            order.shuffle(rng);
            order
        }
        DestroyOp::Q => keyed(&|a| a.quality),
        DestroyOp::E => keyed(&|a| -guiding_energy(a, eval.params())),
        DestroyOp::C => keyed(&|a| -inst.targets[a.target_index].congestion),
    }
}

/// Removes scheduled targets into the taboo bank until it is full or the
/// solution is empty.
pub fn destroy<R: Rng>(state: &mut SearchState, op: DestroyOp, eval: &Evaluator, rng: &mut R) {
    let room = state.capacity.saturating_sub(state.taboo_bank.len());
    let order = destroy_order(&state.solution, op, eval, rng);
    for t in order.into_iter().take(room) {
        state.solution.assignments.retain(|a| a.target_index != t);
        state.taboo_bank.insert(t);
        state.unscheduled.insert(t);
    }
    eval.refresh(&mut state.solution);
}

/// Order in which `op` tries the repair pool.
pub fn repair_order<R: Rng>(state: &SearchState, op: RepairOp, instance: &Instance, rng: &mut R) -> Vec<usize> {
    let pool: Vec<usize> = state
        .unscheduled
        .difference(&state.taboo_bank)
        .copied()
        .collect();
    let keyed = |key: &dyn Fn(usize) -> f64| by_key_then_index(pool.iter().map(|&t| (key(t), t)).collect());
    match op {
        RepairOp::R => {
            let mut order = pool.clone();
            order.shuffle(rng);
            order
        }
        RepairOp::P => keyed(&|t| -(instance.targets[t].priority as f64)),
        RepairOp::L => keyed(&|t| instance.targets[t].vtw_len_s()),
        RepairOp::C => keyed(&|t| instance.targets[t].congestion),
    }
}

/// Tries every pool target once, in operator order.
pub fn repair<R: Rng>(state: &mut SearchState, op: RepairOp, eval: &Evaluator, rng: &mut R) {
    for t in repair_order(state, op, eval.instance(), rng) {
        if try_insert(eval, &mut state.solution, t, rng) {
            state.unscheduled.remove(&t);
        }
    }
    eval.refresh(&mut state.solution);
}
