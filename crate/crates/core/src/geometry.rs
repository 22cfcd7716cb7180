//! Synthetic instance geometry.
//!
//! Orbits are modelled as a straight ground track over flat ground at a fixed
//! altitude and ground speed. Each target gets one pass: the moment the
//! satellite is abeam of it (`pass_midpoint_s`) and the roll needed to look
//! at its centre from the track (`cross_track_roll_deg`). Pitch then follows
//! `atan(v * (t_mid - u) / h)`, so the visible window is the time it takes the
//! pitch to sweep from `+max_pitch` to `-max_pitch`.
//!
//! Strip partitioning projects the target polygon onto the strip direction
//! and its normal: the normal width decides the strip count (one swath per
//! strip) and the extent along the direction decides the imaging duration.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{MospError, Result};
use crate::feasibility::assign_congestion;
use crate::model::{
    Attitude, Distribution, GroundPoint, GroundTarget, Horizon, Instance, ObservationStrip,
    ObservationWay, ObservationWindow, PartitionMode, PassGeometry, Satellite, SensorAttributes,
    SensorType, MAX_STRIPS, SCHEMA_VERSION,
};
use crate::objectives::{transition_s, ObjectiveParams};
use crate::rng::stream;

pub const DEFAULT_DOS_STEP_DEG: f64 = 30.0;

/// Window id of the passive along-track candidate; active candidates use
/// `1 + k` for the `k`-th direction on the grid.
pub const ATO_WINDOW_ID: u32 = 0;

const VTW_RETRIES: usize = 100;
const STREAM_TARGETS: u64 = 0x7461_7267;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PseudoOrbitModel {
    pub altitude_km: f64,
    pub ground_speed_km_s: f64,
}

impl Default for PseudoOrbitModel {
    fn default() -> Self {
        Self {
            altitude_km: 631.0,
            ground_speed_km_s: 7.0,
        }
    }
}

impl PseudoOrbitModel {
    pub fn swath_km(&self, cone_angle_deg: f64) -> f64 {
        2.0 * self.altitude_km * (cone_angle_deg.to_radians() / 2.0).tan()
    }

    /// Time for the pitch to sweep from `-max_pitch` to `+max_pitch`.
    pub fn vtw_length_s(&self, max_pitch_deg: f64) -> f64 {
        2.0 * self.altitude_km * max_pitch_deg.to_radians().tan() / self.ground_speed_km_s
    }

    pub fn pass(&self, midpoint_s: f64, cross_track_roll_deg: f64) -> PassGeometry {
        PassGeometry {
            midpoint_s,
            cross_track_roll_deg,
            altitude_km: self.altitude_km,
            ground_speed_km_s: self.ground_speed_km_s,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub lat_min_deg: f64,
    pub lat_max_deg: f64,
    pub lon_min_deg: f64,
    pub lon_max_deg: f64,
}

impl BoundingBox {
    pub const CHINA: BoundingBox = BoundingBox {
        lat_min_deg: 3.0,
        lat_max_deg: 53.0,
        lon_min_deg: 74.0,
        lon_max_deg: 133.0,
    };

    pub const WORLD: BoundingBox = BoundingBox {
        lat_min_deg: -90.0,
        lat_max_deg: 90.0,
        lon_min_deg: -180.0,
        lon_max_deg: 180.0,
    };

    pub fn contains(&self, lat: f64, lon: f64) -> bool {
        (self.lat_min_deg..=self.lat_max_deg).contains(&lat)
            && (self.lon_min_deg..=self.lon_max_deg).contains(&lon)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub distribution: Distribution,
    pub n_targets: usize,
    pub seed: u64,
    pub bbox: BoundingBox,
    pub area_range_km2: [f64; 2],
    pub vertex_range: [usize; 2],
    pub priority_range: [u8; 2],
    pub horizon_s: f64,
    pub sensor: SensorAttributes,
    pub orbit: PseudoOrbitModel,
    pub partition_mode: PartitionMode,
    pub dos_step_deg: f64,
}

impl InstanceSpec {
    pub fn new(distribution: Distribution, n_targets: usize, seed: u64) -> Self {
        Self {
            distribution,
            n_targets,
            seed,
            bbox: match distribution {
                Distribution::Cd => BoundingBox::CHINA,
                Distribution::Wd => BoundingBox::WORLD,
            },
            area_range_km2: [40.0, 2500.0],
            vertex_range: [3, 6],
            priority_range: [1, 10],
            horizon_s: 86_400.0,
            sensor: SensorAttributes::default(),
            orbit: PseudoOrbitModel::default(),
            partition_mode: PartitionMode::Envelope,
            dos_step_deg: DEFAULT_DOS_STEP_DEG,
        }
    }

    fn check(&self) -> Result<()> {
        let bad = |m: &str| Err(MospError::InvalidParameter(m.to_string()));
        if self.n_targets == 0 {
            return bad("n_targets must be positive");
        }
        if !(self.area_range_km2[0] > 0.0 && self.area_range_km2[0] <= self.area_range_km2[1]) {
            return bad("area range must be positive and ordered");
        }
        if !(self.vertex_range[0] >= 3 && self.vertex_range[0] <= self.vertex_range[1]) {
            return bad("vertex range must start at 3 or more and be ordered");
        }
        if !(self.priority_range[0] >= 1 && self.priority_range[0] <= self.priority_range[1]) {
            return bad("priority range must start at 1 or more and be ordered");
        }
        if !(self.horizon_s > 0.0) {
            return bad("horizon must be positive");
        }
        if !(self.dos_step_deg > 0.0 && self.dos_step_deg <= 360.0) {
            return bad("direction step must lie in (0, 360]");
        }
        if !(self.orbit.altitude_km > 0.0 && self.orbit.ground_speed_km_s > 0.0) {
            return bad("orbit altitude and ground speed must be positive");
        }
        Ok(())
    }
}

/// Visible time window of one pass over a target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VisibleWindow {
    pub begin_s: f64,
    pub end_s: f64,
    pub midpoint_s: f64,
    pub cross_track_roll_deg: f64,
}

pub fn generate_instance(spec: &InstanceSpec) -> Result<Instance> {
    spec.check()?;
    let horizon = Horizon {
        start_s: 0.0,
        end_s: spec.horizon_s,
    };
    let targets = (0..spec.n_targets)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(spec.seed, &[STREAM_TARGETS, i as u64]);
            generate_target(spec, horizon, i as u32 + 1, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut instance = Instance {
        schema_version: SCHEMA_VERSION,
        satellite: Satellite {
            id: 1,
            sensor_type: SensorType::Optical,
            attrs: spec.sensor,
        },
        horizon,
        orbit: spec.orbit,
        partition_mode: spec.partition_mode,
        dos_step_deg: spec.dos_step_deg,
        targets,
        seed: spec.seed,
        distribution: spec.distribution,
    };
    apply_partition(
        &mut instance,
        spec.partition_mode,
        &ObjectiveParams::default(),
    );
    Ok(instance)
}

fn generate_target<R: Rng>(
    spec: &InstanceSpec,
    horizon: Horizon,
    id: u32,
    rng: &mut R,
) -> Result<GroundTarget> {
    let b = spec.bbox;
    let lat = rng.gen_range(b.lat_min_deg..=b.lat_max_deg);
    let lon = rng.gen_range(b.lon_min_deg..=b.lon_max_deg);
    let area = rng.gen_range(spec.area_range_km2[0]..=spec.area_range_km2[1]);
    let vertices = rng.gen_range(spec.vertex_range[0]..=spec.vertex_range[1]);
    let priority = rng.gen_range(spec.priority_range[0]..=spec.priority_range[1]);
    let polygon = random_convex_polygon(rng, vertices, area);
    let vtw = synthesize_vtw(&polygon, &spec.sensor, &spec.orbit, horizon, rng)?;
    Ok(GroundTarget {
        id,
        priority,
        vtw_begin_s: vtw.begin_s,
        vtw_end_s: vtw.end_s,
        congestion: 0.0,
        center_lat_deg: lat,
        center_lon_deg: lon,
        polygon,
        pass_midpoint_s: vtw.midpoint_s,
        cross_track_roll_deg: vtw.cross_track_roll_deg,
        candidate_ows: Vec::new(),
    })
}

/// Vertices on a randomly stretched and rotated ellipse, in angular order,
/// rescaled to the requested area. Points on an ellipse are always in
/// convex position.
fn random_convex_polygon<R: Rng>(rng: &mut R, vertices: usize, area_km2: f64) -> Vec<GroundPoint> {
    let aspect = rng.gen_range(1.0..3.0);
    let rotation = rng.gen_range(0.0..PI);
    let phase = rng.gen_range(0.0..2.0 * PI);
    let spacing = 2.0 * PI / vertices as f64;
    let (sr, cr) = rotation.sin_cos();
    let raw: Vec<GroundPoint> = (0..vertices)
        .map(|j| {
            let a = phase + j as f64 * spacing + rng.gen_range(-0.3..0.3) * spacing;
            let (x, y) = (aspect * a.cos(), a.sin());
            GroundPoint::new(cr * x - sr * y, sr * x + cr * y)
        })
        .collect();
    let scale = (area_km2 / polygon_area(&raw)).sqrt();
    raw.iter()
        .map(|p| GroundPoint::new(p.x_km * scale, p.y_km * scale))
        .collect()
}

/// Signed shoelace area (positive for counter-clockwise order).
pub fn polygon_area(polygon: &[GroundPoint]) -> f64 {
    let n = polygon.len();
    (0..n)
        .map(|i| {
            let (p, q) = (polygon[i], polygon[(i + 1) % n]);
            p.x_km * q.y_km - q.x_km * p.y_km
        })
        .sum::<f64>()
        / 2.0
}

pub fn is_convex(polygon: &[GroundPoint]) -> bool {
    let n = polygon.len();
    if n < 3 {
        return false;
    }
    (0..n).all(|i| {
        let (a, b, c) = (polygon[i], polygon[(i + 1) % n], polygon[(i + 2) % n]);
        let cross = (b.x_km - a.x_km) * (c.y_km - b.y_km) - (b.y_km - a.y_km) * (c.x_km - b.x_km);
        cross > 0.0
    })
}

fn circumradius(polygon: &[GroundPoint]) -> f64 {
    polygon
        .iter()
        .map(|p| p.x_km.hypot(p.y_km))
        .fold(0.0, f64::max)
}

/// Draws a pass over the target and clips its visible window to the horizon.
///
/// The cross-track roll is drawn uniformly from the sensor's roll range
/// shrunk by the angular radius of the target plus one swath, so every strip
/// of every candidate stays within the roll limit.
pub fn synthesize_vtw<R: Rng>(
    polygon: &[GroundPoint],
    sensor: &SensorAttributes,
    orbit: &PseudoOrbitModel,
    horizon: Horizon,
    rng: &mut R,
) -> Result<VisibleWindow> {
    let half = orbit.vtw_length_s(sensor.max_pitch_deg) / 2.0;
    let reach_km = 2.0 * circumradius(polygon) + orbit.swath_km(sensor.cone_angle_deg);
    let margin = (reach_km / orbit.altitude_km).atan().to_degrees();
    let roll_limit = (sensor.max_roll_deg - margin).max(0.0);
    for _ in 0..VTW_RETRIES {
        let mid = rng.gen_range(horizon.start_s..horizon.end_s);
        let roll = if roll_limit > 0.0 {
            rng.gen_range(-roll_limit..roll_limit)
        } else {
            0.0
        };
        let begin = (mid - half).max(horizon.start_s);
        let end = (mid + half).min(horizon.end_s);
        if end - begin >= sensor.min_image_duration_s {
            return Ok(VisibleWindow {
                begin_s: begin,
                end_s: end,
                midpoint_s: mid,
                cross_track_roll_deg: roll,
            });
        }
    }
    Err(MospError::DegenerateWindow(VTW_RETRIES))
}

/// Yaw that aligns the push-broom line with a strip direction, in (-90, 90].
pub fn yaw_for_direction(dos_deg: f64) -> f64 {
    let y = dos_deg.rem_euclid(180.0);
    if y > 90.0 {
        y - 180.0
    } else {
        y
    }
}

struct Projection {
    min_n: f64,
    max_n: f64,
    min_d: f64,
    max_d: f64,
}

fn project(polygon: &[GroundPoint], dos_deg: f64) -> Projection {
    let (s, c) = dos_deg.to_radians().sin_cos();
    let mut p = Projection {
        min_n: f64::INFINITY,
        max_n: f64::NEG_INFINITY,
        min_d: f64::INFINITY,
        max_d: f64::NEG_INFINITY,
    };
    for v in polygon {
        let along = v.x_km * c + v.y_km * s;
        let normal = -v.x_km * s + v.y_km * c;
        p.min_d = p.min_d.min(along);
        p.max_d = p.max_d.max(along);
        p.min_n = p.min_n.min(normal);
        p.max_n = p.max_n.max(normal);
    }
    p
}

/// Width of the polygon perpendicular to direction `dos_deg`.
pub fn projected_width(polygon: &[GroundPoint], dos_deg: f64) -> f64 {
    let p = project(polygon, dos_deg);
    p.max_n - p.min_n
}

/// Swaths needed to cover a band of the given width.
pub fn strips_for_width(width_km: f64, swath_km: f64) -> usize {
    // tolerate round-off on exact multiples of the swath
    ((width_km / swath_km - 1e-9).ceil() as usize).max(1)
}

fn strip_direction(way: ObservationWay, dos_deg: f64) -> f64 {
    match way {
        ObservationWay::Passive => 0.0,
        ObservationWay::Active => dos_deg,
    }
}

/// Splits a target into parallel strips along `dos_deg` (ignored for
/// passive windows, which always follow the ground track).
///
/// Strips come ordered by their signed offset across the strip direction,
/// all with the same duration, and with start offsets inside the window that
/// leave room for a worst-case slew between consecutive strips.
pub fn partition_strips(
    polygon: &[GroundPoint],
    way: ObservationWay,
    dos_deg: f64,
    sensor: &SensorAttributes,
    orbit: &PseudoOrbitModel,
) -> Result<Vec<ObservationStrip>> {
    let dir = strip_direction(way, dos_deg);
    let swath = orbit.swath_km(sensor.cone_angle_deg);
    let proj = project(polygon, dir);
    let count = strips_for_width(proj.max_n - proj.min_n, swath);
    if count > MAX_STRIPS {
        return Err(MospError::TooManyStrips {
            count,
            max: MAX_STRIPS,
        });
    }
    let duration = ((proj.max_d - proj.min_d) / orbit.ground_speed_km_s)
        .max(sensor.min_image_duration_s);
    let (s, c) = dir.to_radians().sin_cos();
    let mid_n = (proj.max_n + proj.min_n) / 2.0;
    let max_rate = (orbit.ground_speed_km_s / orbit.altitude_km).to_degrees();
    let held = match way {
        ObservationWay::Passive => duration,
        ObservationWay::Active => 0.0,
    };

    let mut strips = Vec::with_capacity(count);
    let mut t = 0.0;
    let mut prev_roll: Option<f64> = None;
    for k in 0..count {
        let offset = mid_n + (k as f64 - (count as f64 - 1.0) / 2.0) * swath;
        let at = |along: f64| GroundPoint::new(along * c - offset * s, along * s + offset * c);
        let roll_offset = (offset * c / orbit.altitude_km).atan().to_degrees();
        if let Some(pr) = prev_roll {
            t += bounded_slew_s((roll_offset - pr).abs(), max_rate, held);
        }
        strips.push(ObservationStrip {
            id: k as u32,
            duration_s: duration,
            offset_s: t,
            roll_offset_deg: roll_offset,
            start_center: at(proj.min_d),
            end_center: at(proj.max_d),
            begin_attitude: Attitude::ORIGIN,
            end_attitude: Attitude::ORIGIN,
        });
        t += duration;
        prev_roll = Some(roll_offset);
    }
    Ok(strips)
}

/// Smallest slew time `s` with `s >= trans(fixed + rate * (s + held))`: the
/// pitch keeps drifting with the pass while slewing, so the time allotted
/// must cover the drift it allows.
fn bounded_slew_s(fixed_deg: f64, rate_deg_s: f64, held_s: f64) -> f64 {
    let mut s = transition_s(fixed_deg + rate_deg_s * held_s);
    for _ in 0..200 {
        let next = transition_s(fixed_deg + rate_deg_s * (s + held_s));
        if (next - s).abs() < 1e-12 {
            return next;
        }
        s = next;
    }
    s
}

/// Attitude inside a strip that started imaging at `strip_begin`.
///
/// Passive strips hold the attitude they started with; active strips keep
/// tracking the pass pitch and hold the yaw of their strip direction.
pub(crate) fn strip_attitude(
    ow: &ObservationWindow,
    strip: &ObservationStrip,
    strip_begin: f64,
    u: f64,
) -> Attitude {
    let roll = ow.pass.cross_track_roll_deg + strip.roll_offset_deg;
    match ow.way {
        ObservationWay::Passive => Attitude::new(ow.pass.pitch_at(strip_begin), roll, 0.0),
        ObservationWay::Active => {
            Attitude::new(ow.pass.pitch_at(u), roll, yaw_for_direction(ow.dos_deg))
        }
    }
}

/// Attitude at moment `u` inside strip `strip_index` of an instantiated window.
pub fn attitude_at(ow: &ObservationWindow, strip_index: usize, u: f64) -> Result<Attitude> {
    let strip = ow.strips.get(strip_index).ok_or(MospError::StripIndex {
        ow_id: ow.id,
        index: strip_index,
    })?;
    let begin = ow.begin_s + strip.offset_s;
    let end = begin + strip.duration_s;
    let eps = 1e-9;
    if !(u >= begin - eps && u <= end + eps) {
        return Err(MospError::OutsideStrip {
            strip: strip_index,
            u,
            begin,
            end,
        });
    }
    Ok(strip_attitude(ow, strip, begin, u))
}

impl ObservationWindow {
    /// Copy of the window shifted to begin at `begin_s`, with all strip and
    /// window attitudes evaluated at the new moments.
    pub fn instantiate(&self, begin_s: f64) -> ObservationWindow {
        let mut ow = self.clone();
        let span = self.span_s();
        ow.begin_s = begin_s;
        ow.end_s = begin_s + span;
        for i in 0..ow.strips.len() {
            let sb = begin_s + ow.strips[i].offset_s;
            let se = sb + ow.strips[i].duration_s;
            let b = strip_attitude(&ow, &ow.strips[i], sb, sb);
            let e = strip_attitude(&ow, &ow.strips[i], sb, se);
            ow.strips[i].begin_attitude = b;
            ow.strips[i].end_attitude = e;
        }
        if let (Some(first), Some(last)) = (ow.strips.first(), ow.strips.last()) {
            ow.begin_attitude = first.begin_attitude;
            ow.end_attitude = last.end_attitude;
        }
        ow
    }
}

/// Builds one candidate window, anchored at the start of the visible window.
pub fn build_window(
    target: &GroundTarget,
    id: u32,
    way: ObservationWay,
    dos_deg: f64,
    sensor: &SensorAttributes,
    orbit: &PseudoOrbitModel,
) -> Result<ObservationWindow> {
    let strips = partition_strips(&target.polygon, way, dos_deg, sensor, orbit)?;
    let span = strips
        .last()
        .map(|s| s.offset_s + s.duration_s)
        .unwrap_or(0.0);
    let skeleton = ObservationWindow {
        id,
        way,
        dos_deg: strip_direction(way, dos_deg),
        begin_s: target.vtw_begin_s,
        end_s: target.vtw_begin_s + span,
        begin_attitude: Attitude::ORIGIN,
        end_attitude: Attitude::ORIGIN,
        pass: orbit.pass(target.pass_midpoint_s, target.cross_track_roll_deg),
        strips,
    };
    Ok(skeleton.instantiate(target.vtw_begin_s))
}

fn direction_grid(step_deg: f64) -> Vec<f64> {
    let n = (360.0 / step_deg).round().max(1.0) as usize;
    (0..n).map(|k| k as f64 * step_deg).filter(|d| *d < 360.0).collect()
}

/// Candidate observation windows of a target under a partition mode.
pub fn build_partition_set(
    target: &GroundTarget,
    mode: PartitionMode,
    sensor: &SensorAttributes,
    orbit: &PseudoOrbitModel,
    dos_step_deg: f64,
) -> Vec<ObservationWindow> {
    let ato = || build_window(target, ATO_WINDOW_ID, ObservationWay::Passive, 0.0, sensor, orbit).ok();
    let grid: Vec<(u32, f64)> = direction_grid(dos_step_deg)
        .into_iter()
        .enumerate()
        .map(|(k, d)| (1 + k as u32, d))
        .filter(|(_, d)| yaw_for_direction(*d).abs() <= sensor.max_yaw_deg)
        .collect();
    let active = |id: u32, d: f64| {
        build_window(target, id, ObservationWay::Active, d, sensor, orbit).ok()
    };

    let mut out = Vec::new();
    match mode {
        PartitionMode::Ato => out.extend(ato()),
        PartitionMode::Nato => out.extend(grid.iter().filter_map(|&(id, d)| active(id, d))),
        PartitionMode::Complete => {
            out.extend(ato());
            out.extend(grid.iter().filter_map(|&(id, d)| active(id, d)));
        }
        PartitionMode::Envelope => {
            out.extend(ato());
            let swath = orbit.swath_km(sensor.cone_angle_deg);
            let counts: Vec<usize> = grid
                .iter()
                .map(|&(_, d)| strips_for_width(projected_width(&target.polygon, d), swath))
                .collect();
            if let Some(&best) = counts.iter().filter(|&&c| c <= MAX_STRIPS).min() {
                out.extend(
                    grid.iter()
                        .zip(&counts)
                        .filter(|(_, &c)| c == best)
                        .filter_map(|(&(id, d), _)| active(id, d)),
                );
            }
        }
    }
    out
}

/// Rebuilds every target's candidate windows for `mode` and refreshes the
/// congestion values that depend on them.
pub fn apply_partition(instance: &mut Instance, mode: PartitionMode, params: &ObjectiveParams) {
    let sensor = instance.satellite.attrs;
    let orbit = instance.orbit;
    let step = instance.dos_step_deg;
    instance.targets.par_iter_mut().for_each(|t| {
        t.candidate_ows = build_partition_set(t, mode, &sensor, &orbit, step);
    });
    instance.partition_mode = mode;
    assign_congestion(instance, params);
}
