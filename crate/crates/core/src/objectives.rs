//! Transition times, image quality, energy accounting and the two
//! normalised objectives (quality loss rate and energy).

use serde::{Deserialize, Serialize};

use crate::error::{MospError, Result};
use crate::geometry::strip_attitude;
use crate::model::{
    Assignment, Attitude, EnergyBreakdown, Instance, ObservationWay, ObservationWindow, Schedule,
    MAX_STRIPS,
};

/// Angular transition velocities of the slew model (deg/s).
pub const SLEW_VELOCITIES: [f64; 4] = [1.5, 2.0, 2.5, 3.0];

/// How the cumulative quality of a window is normalised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum MiqPolicy {
    /// Divide by the number of quality samples taken in the window, so a
    /// constant attitude yields exactly its instant quality.
    #[default]
    SampleCount,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveParams {
    /// Active imaging power (W).
    pub eo_a: f64,
    /// Passive imaging power (W).
    pub eo_p: f64,
    /// Attitude conversion power (W).
    pub ea: f64,
    pub max_transition_s: f64,
    pub max_strips: usize,
    pub sample_step_s: f64,
    pub miq_policy: MiqPolicy,
}

impl Default for ObjectiveParams {
    fn default() -> Self {
        Self {
            eo_a: 0.1,
            eo_p: 0.08,
            ea: 0.05,
            max_transition_s: 100.0,
            max_strips: MAX_STRIPS,
            sample_step_s: 1.0,
            miq_policy: MiqPolicy::SampleCount,
        }
    }
}

impl ObjectiveParams {
    pub fn imaging_rate(&self, way: ObservationWay) -> f64 {
        match way {
            ObservationWay::Active => self.eo_a,
            ObservationWay::Passive => self.eo_p,
        }
    }
}

/// Slew duration for a total attitude change of `delta_g_deg` degrees.
pub fn trans_time(delta_g_deg: f64) -> Result<f64> {
    if !(delta_g_deg >= 0.0) {
        return Err(MospError::NegativeAngle(delta_g_deg));
    }
    Ok(transition_s(delta_g_deg))
}

pub(crate) fn transition_s(dg: f64) -> f64 {
    let [v1, v2, v3, v4] = SLEW_VELOCITIES;
    if dg <= 10.0 {
        35.0 / 3.0
    } else if dg <= 30.0 {
        5.0 + dg / v1
    } else if dg <= 60.0 {
        10.0 + dg / v2
    } else if dg <= 90.0 {
        16.0 + dg / v3
    } else {
        22.0 + dg / v4
    }
}

/// Total attitude change between two attitudes (L1 over the three axes).
pub fn delta_g(a: &Attitude, b: &Attitude) -> f64 {
    (a.pitch_deg - b.pitch_deg).abs() + (a.roll_deg - b.roll_deg).abs() + (a.yaw_deg - b.yaw_deg).abs()
}

pub(crate) fn slew_s(from: &Attitude, to: &Attitude) -> f64 {
    transition_s(delta_g(from, to))
}

pub fn instant_quality(pitch_deg: f64, roll_deg: f64) -> Result<f64> {
    if !(pitch_deg.abs() <= 90.0 && roll_deg.abs() <= 90.0) {
        return Err(MospError::AngleOutOfRange {
            pitch: pitch_deg,
            roll: roll_deg,
        });
    }
    Ok(quality_of(pitch_deg, roll_deg))
}

fn quality_of(pitch_deg: f64, roll_deg: f64) -> f64 {
    (1.0 - pitch_deg.abs() / 90.0) * (1.0 - roll_deg.abs() / 90.0)
}

/// Mean instant quality over midpoint samples of each imaging interval.
///
/// Each interval of length `d` is cut into `max(1, round(d / step))` equal
/// cells and sampled at the cell centres. Samples are weighted by their
/// cell width, so the normaliser is the effective sample count
/// `total imaging time / step` and the mean converges as the step shrinks.
/// `attitude(i, u)` gives the attitude of interval `i` at moment `u`.
pub fn sampled_quality<F>(intervals: &[(f64, f64)], step_s: f64, attitude: F) -> Result<f64>
where
    F: Fn(usize, f64) -> Attitude,
{
    if !(step_s > 0.0) {
        return Err(MospError::InvalidParameter(format!(
            "quality sample step must be positive, got {step_s}"
        )));
    }
    let mut weighted = 0.0;
    let mut total_s = 0.0;
    let mut plain = 0.0;
    let mut count = 0usize;
    for (i, &(b, e)) in intervals.iter().enumerate() {
        let d = e - b;
        let n = ((d / step_s).round() as usize).max(1);
        let h = d / n as f64;
        for k in 0..n {
            let att = attitude(i, b + (k as f64 + 0.5) * h);
            let q = instant_quality(att.pitch_deg, att.roll_deg)?;
            weighted += q * h;
            plain += q;
        }
        total_s += d;
        count += n;
    }
    if count == 0 {
        return Err(MospError::NoQualitySamples { ow_id: 0 });
    }
    // zero-length intervals carry no time weight; fall back to the plain mean
    if total_s > 0.0 {
        Ok((weighted / total_s).clamp(0.0, 1.0))
    } else {
        Ok(plain / count as f64)
    }
}

/// Cumulative image quality of `ow` when it begins at `begin_s`.
pub fn cumulative_quality(ow: &ObservationWindow, begin_s: f64, step_s: f64) -> Result<f64> {
    if ow.strips.is_empty() {
        return Err(MospError::NoQualitySamples { ow_id: ow.id });
    }
    let intervals: Vec<(f64, f64)> = ow
        .strips
        .iter()
        .map(|s| {
            let b = begin_s + s.offset_s;
            (b, b + s.duration_s)
        })
        .collect();
    sampled_quality(&intervals, step_s, |i, u| {
        strip_attitude(ow, &ow.strips[i], intervals[i].0, u)
    })
}

/// Instantiated summary of a window placed at a begin moment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct WindowObservation {
    pub end_s: f64,
    pub begin_attitude: Attitude,
    pub end_attitude: Attitude,
    pub quality: f64,
    pub imaging_s: f64,
    pub inner_slew_s: f64,
}

pub(crate) fn observe_window(
    ow: &ObservationWindow,
    begin_s: f64,
    step_s: f64,
) -> Result<WindowObservation> {
    let quality = cumulative_quality(ow, begin_s, step_s)?;
    let mut prev_end: Option<Attitude> = None;
    let mut inner_slew_s = 0.0;
    let mut first = Attitude::ORIGIN;
    let mut last = Attitude::ORIGIN;
    for (i, s) in ow.strips.iter().enumerate() {
        let sb = begin_s + s.offset_s;
        let b = strip_attitude(ow, s, sb, sb);
        let e = strip_attitude(ow, s, sb, sb + s.duration_s);
        if let Some(p) = prev_end {
            inner_slew_s += slew_s(&p, &b);
        }
        if i == 0 {
            first = b;
        }
        last = e;
        prev_end = Some(e);
    }
    Ok(WindowObservation {
        end_s: begin_s + ow.span_s(),
        begin_attitude: first,
        end_attitude: last,
        quality,
        imaging_s: ow.imaging_s(),
        inner_slew_s,
    })
}

/// Energy of a schedule from its assignments' cached window summaries.
pub fn energy(schedule: &Schedule, params: &ObjectiveParams) -> Result<EnergyBreakdown> {
    if let Some(pos) = schedule
        .assignments
        .windows(2)
        .position(|w| w[0].begin_s > w[1].begin_s)
    {
        return Err(MospError::UnsortedSchedule(pos + 1));
    }
    Ok(energy_of(&schedule.assignments, params))
}

fn energy_of(assignments: &[Assignment], p: &ObjectiveParams) -> EnergyBreakdown {
    let mut e = EnergyBreakdown::default();
    for a in assignments {
        match a.way {
            ObservationWay::Active => e.ot_a += a.imaging_s,
            ObservationWay::Passive => e.ot_p += a.imaging_s,
        }
        e.at_in += a.inner_slew_s;
    }
    for w in assignments.windows(2) {
        e.at_out += slew_s(&w[0].end_attitude, &w[1].begin_attitude);
    }
    e.total_w_s = p.eo_a * e.ot_a + p.eo_p * e.ot_p + p.ea * (e.at_in + e.at_out);
    e
}

pub fn priority_sum(instance: &Instance) -> f64 {
    instance.targets.iter().map(|t| t.priority as f64).sum()
}

/// Quality loss rate: one minus the priority-weighted quality captured.
pub fn loss_rate_f1(schedule: &Schedule, instance: &Instance) -> f64 {
    loss_rate(&schedule.assignments, instance, priority_sum(instance))
}

fn loss_rate(assignments: &[Assignment], instance: &Instance, total: f64) -> f64 {
    if total <= 0.0 {
        return 1.0;
    }
    let gained: f64 = assignments
        .iter()
        .map(|a| instance.targets[a.target_index].priority as f64 * a.quality)
        .sum();
    1.0 - gained / total
}

/// Energy normaliser: every target imaged actively over the longest visible
/// window plus worst-case slews into and inside every target.
pub fn compute_mec(instance: &Instance, params: &ObjectiveParams) -> f64 {
    let n = instance.n_targets() as f64;
    let max_vtw = instance
        .targets
        .iter()
        .map(|t| t.vtw_len_s())
        .fold(0.0, f64::max);
    n * params.eo_a * max_vtw
        + params.max_transition_s * (1.0 + params.max_strips as f64) * params.ea * n
}

pub fn energy_f2(schedule: &Schedule, instance: &Instance, params: &ObjectiveParams) -> Result<f64> {
    let e = energy(schedule, params)?;
    Ok(normalise_energy(e.total_w_s, compute_mec(instance, params)))
}

fn normalise_energy(total: f64, mec: f64) -> f64 {
    if mec > 0.0 {
        total / mec
    } else {
        0.0
    }
}

/// Per-instance objective evaluator with the normalisers precomputed.
#[derive(Debug, Clone)]
pub struct Evaluator<'a> {
    instance: &'a Instance,
    params: ObjectiveParams,
    mec: f64,
    priority_sum: f64,
}

impl<'a> Evaluator<'a> {
    pub fn new(instance: &'a Instance, params: ObjectiveParams) -> Self {
        Self {
            instance,
            params,
            mec: compute_mec(instance, &params),
            priority_sum: priority_sum(instance),
        }
    }

    pub fn instance(&self) -> &'a Instance {
        self.instance
    }

    pub fn params(&self) -> &ObjectiveParams {
        &self.params
    }

    pub fn mec(&self) -> f64 {
        self.mec
    }

    /// Places candidate window `ow_index` of target `target_index` at `begin_s`.
    ///
    /// Panics if either index is out of range; solver code only passes
    /// indices taken from the instance.
    pub fn observe(&self, target_index: usize, ow_index: usize, begin_s: f64) -> Assignment {
        let target = &self.instance.targets[target_index];
        let ow = &target.candidate_ows[ow_index];
        let obs = observe_window(ow, begin_s, self.params.sample_step_s)
            .expect("candidate windows have strips within attitude limits");
        Assignment {
            target_index,
            target_id: target.id,
            ow_id: ow.id,
            way: ow.way,
            begin_s,
            end_s: obs.end_s,
            begin_attitude: obs.begin_attitude,
            end_attitude: obs.end_attitude,
            quality: obs.quality,
            imaging_s: obs.imaging_s,
            inner_slew_s: obs.inner_slew_s,
        }
    }

    /// Recomputes `f1`, `f2` and the energy breakdown from cached assignments.
    pub fn refresh(&self, schedule: &mut Schedule) {
        debug_assert!(schedule.is_sorted());
        let e = energy_of(&schedule.assignments, &self.params);
        schedule.f1 = loss_rate(&schedule.assignments, self.instance, self.priority_sum);
        schedule.f2 = normalise_energy(e.total_w_s, self.mec);
        schedule.energy = e;
    }

    /// Rebuilds every assignment from the instance, then the objectives.
    pub fn recompute(&self, schedule: &Schedule) -> Result<Schedule> {
        let mut out = Schedule::empty();
        for (position, a) in schedule.assignments.iter().enumerate() {
            let target = self
                .instance
                .targets
                .get(a.target_index)
                .ok_or(MospError::UnknownTarget {
                    position,
                    target_index: a.target_index,
                })?;
            let (k, ow) = target.window(a.ow_id).ok_or(MospError::UnknownWindow {
                position,
                target_id: target.id,
                ow_id: a.ow_id,
            })?;
            let obs = observe_window(ow, a.begin_s, self.params.sample_step_s)?;
            debug_assert_eq!(ow.id, target.candidate_ows[k].id);
            out.assignments.push(Assignment {
                target_index: a.target_index,
                target_id: target.id,
                ow_id: ow.id,
                way: ow.way,
                begin_s: a.begin_s,
                end_s: obs.end_s,
                begin_attitude: obs.begin_attitude,
                end_attitude: obs.end_attitude,
                quality: obs.quality,
                imaging_s: obs.imaging_s,
                inner_slew_s: obs.inner_slew_s,
            });
        }
        if let Some(pos) = out
            .assignments
            .windows(2)
            .position(|w| w[0].begin_s > w[1].begin_s)
        {
            return Err(MospError::UnsortedSchedule(pos + 1));
        }
        self.refresh(&mut out);
        Ok(out)
    }
}
