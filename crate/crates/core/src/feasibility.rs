//! Schedule constraint checks and the pairwise conflict measures used to
//! rank targets by congestion.

use std::collections::HashMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{MospError, Result};
use crate::model::{GroundTarget, Instance, Schedule};
use crate::objectives::{delta_g, observe_window, transition_s, ObjectiveParams};

/// Slack allowed when comparing moments computed along different paths.
pub const TIME_TOLERANCE_S: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ViolationKind {
    DuplicateTarget,
    OutsideVTW,
    DurationBelowMin,
    TransitionOverlap,
    OrderingViolation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub target_ids: Vec<u32>,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} {:?}: {}", self.kind, self.target_ids, self.detail)
    }
}

/// Lists every constraint the schedule breaks. Attitudes and window ends are
/// rebuilt from the instance rather than read from the cached assignment
/// fields, so a stale or tampered schedule cannot pass.
///
/// Fails only when an assignment refers to a target or window the instance
/// does not have.
pub fn check_schedule(
    schedule: &Schedule,
    instance: &Instance,
    params: &ObjectiveParams,
) -> Result<Vec<Violation>> {
    let d0 = instance.satellite.attrs.min_image_duration_s;
    let mut out = Vec::new();
    let mut seen: HashMap<u32, usize> = HashMap::new();
    let mut placed = Vec::with_capacity(schedule.len());

    for (position, a) in schedule.assignments.iter().enumerate() {
        let target = instance
            .targets
            .get(a.target_index)
            .ok_or(MospError::UnknownTarget {
                position,
                target_index: a.target_index,
            })?;
        let (_, ow) = target.window(a.ow_id).ok_or(MospError::UnknownWindow {
            position,
            target_id: target.id,
            ow_id: a.ow_id,
        })?;

        if let Some(first) = seen.insert(target.id, position) {
            out.push(Violation {
                kind: ViolationKind::DuplicateTarget,
                target_ids: vec![target.id],
                detail: format!("scheduled at positions {first} and {position}"),
            });
        }

        let obs = observe_window(ow, a.begin_s, params.sample_step_s)?;
        if a.begin_s < target.vtw_begin_s - TIME_TOLERANCE_S
            || obs.end_s > target.vtw_end_s + TIME_TOLERANCE_S
        {
            out.push(Violation {
                kind: ViolationKind::OutsideVTW,
                target_ids: vec![target.id],
                detail: format!(
                    "window [{}, {}] outside visible window [{}, {}]",
                    a.begin_s, obs.end_s, target.vtw_begin_s, target.vtw_end_s
                ),
            });
        }
        if let Some(s) = ow.strips.iter().find(|s| s.duration_s < d0 - TIME_TOLERANCE_S) {
            out.push(Violation {
                kind: ViolationKind::DurationBelowMin,
                target_ids: vec![target.id],
                detail: format!("strip {} lasts {} s, minimum is {} s", s.id, s.duration_s, d0),
            });
        }
        placed.push((target.id, a.begin_s, obs));
    }

    for w in placed.windows(2) {
        let (id_a, begin_a, ref prev) = w[0];
        let (id_b, begin_b, ref next) = w[1];
        if begin_b <= begin_a {
            out.push(Violation {
                kind: ViolationKind::OrderingViolation,
                target_ids: vec![id_a, id_b],
                detail: format!("begin {begin_b} does not follow {begin_a}"),
            });
        }
        let need = transition_s(delta_g(&prev.end_attitude, &next.begin_attitude));
        let gap = begin_b - prev.end_s;
        if gap < need - TIME_TOLERANCE_S {
            out.push(Violation {
                kind: ViolationKind::TransitionOverlap,
                target_ids: vec![id_a, id_b],
                detail: format!("gap {gap} s is shorter than the {need} s transition"),
            });
        }
    }
    Ok(out)
}

fn shortest_span(t: &GroundTarget) -> Option<f64> {
    t.candidate_ows
        .iter()
        .map(|w| w.span_s())
        .min_by(|a, b| a.total_cmp(b))
}

/// `a` observed as early as possible, then `b` after a conservative
/// transition, both inside their visible windows.
fn fits_in_order(a: &GroundTarget, span_a: f64, b: &GroundTarget, span_b: f64, max_t: f64) -> bool {
    let end_a = a.vtw_begin_s + span_a;
    if end_a > a.vtw_end_s {
        return false;
    }
    let begin_b = b.vtw_begin_s.max(end_a + max_t);
    begin_b + span_b <= b.vtw_end_s
}

/// How strongly two targets compete for time: 0 when they cannot interact,
/// 0.5 when both can still be observed in some order, 1 when at most one of
/// them can be observed.
///
/// Targets without candidate windows never conflict.
pub fn conflict_distance(a: &GroundTarget, b: &GroundTarget, params: &ObjectiveParams) -> f64 {
    let (Some(span_a), Some(span_b)) = (shortest_span(a), shortest_span(b)) else {
        return 0.0;
    };
    let max_t = params.max_transition_s;
    let gap = (b.vtw_begin_s - a.vtw_end_s).max(a.vtw_begin_s - b.vtw_end_s);
    if gap >= max_t {
        return 0.0;
    }
    if fits_in_order(a, span_a, b, span_b, max_t) || fits_in_order(b, span_b, a, span_a, max_t) {
        0.5
    } else {
        1.0
    }
}

/// Dimensionless processing `1 / exp(1 - x / x_max)`.
pub fn nod(x: f64, x_max: f64) -> Result<f64> {
    if !(x_max > 0.0) {
        return Err(MospError::NonPositiveMax(x_max));
    }
    Ok((x / x_max - 1.0).exp())
}

fn congestion_from(weights: &[f64]) -> f64 {
    let max = weights.iter().copied().fold(0.0, f64::max);
    if max <= 0.0 {
        return 0.0;
    }
    weights.iter().map(|&x| (x / max - 1.0).exp()).sum()
}

/// Workpiece congestion of target `i`.
pub fn congestion(i: usize, instance: &Instance, params: &ObjectiveParams) -> f64 {
    let gi = &instance.targets[i];
    let weights: Vec<f64> = instance
        .targets
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != i)
        .map(|(_, gj)| gj.priority as f64 * conflict_distance(gi, gj, params))
        .collect();
    congestion_from(&weights)
}

/// Stores the congestion of every target on the target itself.
pub fn assign_congestion(instance: &mut Instance, params: &ObjectiveParams) {
    let values: Vec<f64> = (0..instance.n_targets())
        .into_par_iter()
        .map(|i| congestion(i, instance, params))
        .collect();
    for (t, wc) in instance.targets.iter_mut().zip(values) {
        t.congestion = wc;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{generate_instance, InstanceSpec};
    use crate::model::Distribution;
    use crate::objectives::Evaluator;

    fn instance() -> Instance {
        generate_instance(&InstanceSpec::new(Distribution::Cd, 20, 11)).unwrap()
    }

    #[test]
    fn nod_values() {
        assert_eq!(nod(3.0, 3.0).unwrap(), 1.0);
        assert!((nod(0.0, 3.0).unwrap() - 0.367_879_441_171_442_3).abs() < 1e-15);
        assert!(nod(1.0, 3.0).unwrap() < nod(2.0, 3.0).unwrap());
        assert!(matches!(nod(1.0, 0.0), Err(MospError::NonPositiveMax(_))));
    }

    #[test]
    fn empty_schedule_is_feasible() {
        let inst = instance();
        assert!(check_schedule(&Schedule::empty(), &inst, &ObjectiveParams::default())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn duplicate_target_is_reported() {
        let inst = instance();
        let eval = Evaluator::new(&inst, ObjectiveParams::default());
        let t = &inst.targets[0];
        let mut s = Schedule::empty();
        s.assignments.push(eval.observe(0, 0, t.vtw_begin_s));
        s.assignments.push(eval.observe(0, 0, t.vtw_begin_s + 1.0));
        let kinds: Vec<_> = check_schedule(&s, &inst, eval.params())
            .unwrap()
            .into_iter()
            .map(|v| v.kind)
            .collect();
        assert!(kinds.contains(&ViolationKind::DuplicateTarget));
    }

    #[test]
    fn outside_window_is_reported() {
        let inst = instance();
        let eval = Evaluator::new(&inst, ObjectiveParams::default());
        let mut s = Schedule::empty();
        s.assignments.push(eval.observe(3, 0, inst.targets[3].vtw_begin_s - 1.0));
        let v = check_schedule(&s, &inst, eval.params()).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].kind, ViolationKind::OutsideVTW);
    }
}
