//! Domain types of an observation scheme and its solutions.
//!
//! All times are seconds since the start of the scheduling horizon. Ground
//! geometry lives in a local flat frame per target: `x_km` runs along the
//! ground track, `y_km` across it.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{MospError, Result};
use crate::geometry::PseudoOrbitModel;
use crate::objectives::{Evaluator, ObjectiveParams};

pub const SCHEMA_VERSION: u32 = 1;

/// Upper bound on strips per observation window.
pub const MAX_STRIPS: usize = 10;

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

fn dos_step() -> f64 {
    crate::geometry::DEFAULT_DOS_STEP_DEG
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorAttributes {
    pub cone_angle_deg: f64,
    pub max_roll_deg: f64,
    pub max_pitch_deg: f64,
    pub max_yaw_deg: f64,
    pub min_image_duration_s: f64,
}

impl Default for SensorAttributes {
    fn default() -> Self {
        Self {
            cone_angle_deg: 1.72,
            max_roll_deg: 45.0,
            max_pitch_deg: 45.0,
            max_yaw_deg: 90.0,
            min_image_duration_s: 5.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SensorType {
    Optical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Satellite {
    pub id: u32,
    pub sensor_type: SensorType,
    pub attrs: SensorAttributes,
}

impl Default for Satellite {
    fn default() -> Self {
        Self {
            id: 1,
            sensor_type: SensorType::Optical,
            attrs: SensorAttributes::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Horizon {
    pub start_s: f64,
    pub end_s: f64,
}

impl Horizon {
    pub fn len_s(&self) -> f64 {
        self.end_s - self.start_s
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.start_s && t <= self.end_s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Attitude {
    pub pitch_deg: f64,
    pub roll_deg: f64,
    pub yaw_deg: f64,
}

impl Attitude {
    /// Nadir-pointing rest attitude.
    pub const ORIGIN: Attitude = Attitude {
        pitch_deg: 0.0,
        roll_deg: 0.0,
        yaw_deg: 0.0,
    };

    pub fn new(pitch_deg: f64, roll_deg: f64, yaw_deg: f64) -> Self {
        Self {
            pitch_deg,
            roll_deg,
            yaw_deg,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GroundPoint {
    pub x_km: f64,
    pub y_km: f64,
}

impl GroundPoint {
    pub fn new(x_km: f64, y_km: f64) -> Self {
        Self { x_km, y_km }
    }
}

/// Passive (along-track, attitude held) or active (attitude steered) imaging.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum ObservationWay {
    Passive,
    Active,
}

impl From<ObservationWay> for u8 {
    fn from(way: ObservationWay) -> u8 {
        match way {
            ObservationWay::Passive => 0,
            ObservationWay::Active => 1,
        }
    }
}

impl TryFrom<u8> for ObservationWay {
    type Error = String;

    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            0 => Ok(ObservationWay::Passive),
            1 => Ok(ObservationWay::Active),
            other => Err(format!("observation way must be 0 or 1, got {other}")),
        }
    }
}

/// Which candidate observation windows a target offers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PartitionMode {
    /// A single passive window with strips parallel to the ground track.
    #[serde(rename = "ATO")]
    Ato,
    /// Active windows for every strip direction on the direction grid.
    #[serde(rename = "NATO")]
    Nato,
    /// Union of the two sets above.
    Complete,
    /// The passive window plus the active windows needing the fewest strips.
    Envelope,
}

impl PartitionMode {
    pub const ALL: [PartitionMode; 4] = [
        PartitionMode::Ato,
        PartitionMode::Nato,
        PartitionMode::Complete,
        PartitionMode::Envelope,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PartitionMode::Ato => "ato",
            PartitionMode::Nato => "nato",
            PartitionMode::Complete => "complete",
            PartitionMode::Envelope => "envelope",
        }
    }
}

impl fmt::Display for PartitionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for PartitionMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "ato" => Ok(PartitionMode::Ato),
            "nato" => Ok(PartitionMode::Nato),
            "complete" => Ok(PartitionMode::Complete),
            "envelope" => Ok(PartitionMode::Envelope),
            other => Err(format!("unknown partition mode '{other}'")),
        }
    }
}

/// Pass over a target: when the satellite is abeam and how far off-track.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PassGeometry {
    pub midpoint_s: f64,
    pub cross_track_roll_deg: f64,
    pub altitude_km: f64,
    pub ground_speed_km_s: f64,
}

impl PassGeometry {
    /// Pitch needed to look at the target centre at moment `u`; zero when abeam.
    pub fn pitch_at(&self, u: f64) -> f64 {
        (self.ground_speed_km_s * (self.midpoint_s - u) / self.altitude_km)
            .atan()
            .to_degrees()
    }

    /// Largest pitch rate of the pass, reached when abeam (deg/s).
    pub fn max_pitch_rate_deg_s(&self) -> f64 {
        (self.ground_speed_km_s / self.altitude_km).to_degrees()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationStrip {
    pub id: u32,
    pub duration_s: f64,
    /// Imaging start relative to the window begin.
    pub offset_s: f64,
    /// Roll offset of the strip centre line relative to the target centre.
    pub roll_offset_deg: f64,
    pub start_center: GroundPoint,
    pub end_center: GroundPoint,
    pub begin_attitude: Attitude,
    pub end_attitude: Attitude,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationWindow {
    pub id: u32,
    pub way: ObservationWay,
    pub dos_deg: f64,
    pub begin_s: f64,
    pub end_s: f64,
    pub begin_attitude: Attitude,
    pub end_attitude: Attitude,
    pub pass: PassGeometry,
    pub strips: Vec<ObservationStrip>,
}

impl ObservationWindow {
    pub fn span_s(&self) -> f64 {
        self.end_s - self.begin_s
    }

    pub fn imaging_s(&self) -> f64 {
        self.strips.iter().map(|s| s.duration_s).sum()
    }

    pub fn strip_interval(&self, index: usize) -> Option<(f64, f64)> {
        self.strips.get(index).map(|s| {
            let b = self.begin_s + s.offset_s;
            (b, b + s.duration_s)
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTarget {
    pub id: u32,
    pub priority: u8,
    pub vtw_begin_s: f64,
    pub vtw_end_s: f64,
    pub congestion: f64,
    pub center_lat_deg: f64,
    pub center_lon_deg: f64,
    /// Convex polygon, counter-clockwise, local km offsets from the centre.
    pub polygon: Vec<GroundPoint>,
    pub pass_midpoint_s: f64,
    pub cross_track_roll_deg: f64,
    pub candidate_ows: Vec<ObservationWindow>,
}

impl GroundTarget {
    pub fn vtw_len_s(&self) -> f64 {
        self.vtw_end_s - self.vtw_begin_s
    }

    pub fn window(&self, ow_id: u32) -> Option<(usize, &ObservationWindow)> {
        self.candidate_ows
            .iter()
            .enumerate()
            .find(|(_, ow)| ow.id == ow_id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Distribution {
    #[serde(rename = "CD")]
    Cd,
    #[serde(rename = "WD")]
    Wd,
}

impl std::str::FromStr for Distribution {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "cd" => Ok(Distribution::Cd),
            "wd" => Ok(Distribution::Wd),
            other => Err(format!("unknown distribution '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub satellite: Satellite,
    pub horizon: Horizon,
    pub orbit: PseudoOrbitModel,
    /// Partition set the targets' candidate windows were built with.
    pub partition_mode: PartitionMode,
    #[serde(default = "dos_step")]
    pub dos_step_deg: f64,
    pub targets: Vec<GroundTarget>,
    pub seed: u64,
    pub distribution: Distribution,
}

impl Instance {
    pub fn n_targets(&self) -> usize {
        self.targets.len()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let inst: Instance = serde_json::from_str(s)?;
        check_version(inst.schema_version)?;
        Ok(inst)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

fn check_version(found: u32) -> Result<()> {
    if found != SCHEMA_VERSION {
        return Err(MospError::SchemaVersion {
            found,
            expected: SCHEMA_VERSION,
        });
    }
    Ok(())
}

/// One scheduled target: the decision triple plus the instantiated window
/// summary the objectives are computed from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub target_index: usize,
    pub target_id: u32,
    pub ow_id: u32,
    pub way: ObservationWay,
    pub begin_s: f64,
    pub end_s: f64,
    pub begin_attitude: Attitude,
    pub end_attitude: Attitude,
    /// Cumulative image quality of the instantiated window.
    pub quality: f64,
    /// Summed strip durations.
    pub imaging_s: f64,
    /// Summed transition times between consecutive strips.
    pub inner_slew_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub ot_a: f64,
    pub ot_p: f64,
    pub at_in: f64,
    pub at_out: f64,
    pub total_w_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    /// Sorted ascending by begin moment.
    pub assignments: Vec<Assignment>,
    pub f1: f64,
    pub f2: f64,
    pub energy: EnergyBreakdown,
}

impl Default for Schedule {
    fn default() -> Self {
        Self::empty()
    }
}

impl Schedule {
    /// Schedule observing nothing.
    pub fn empty() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            assignments: Vec::new(),
            f1: 1.0,
            f2: 0.0,
            energy: EnergyBreakdown::default(),
        }
    }

    pub fn objectives(&self) -> [f64; 2] {
        [self.f1, self.f2]
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn contains_target(&self, target_index: usize) -> bool {
        self.assignments
            .iter()
            .any(|a| a.target_index == target_index)
    }

    pub fn contains_target_id(&self, target_id: u32) -> bool {
        self.assignments.iter().any(|a| a.target_id == target_id)
    }

    pub fn is_sorted(&self) -> bool {
        self.assignments
            .windows(2)
            .all(|w| w[0].begin_s <= w[1].begin_s)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let sched: Schedule = serde_json::from_str(s)?;
        check_version(sched.schema_version)?;
        Ok(sched)
    }
}

/// A broken instance invariant, located by target id (if any) and field.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceViolation {
    pub target_id: Option<u32>,
    pub field: &'static str,
    pub message: String,
}

impl fmt::Display for InstanceViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.target_id {
            Some(id) => write!(f, "target {id}: {}: {}", self.field, self.message),
            None => write!(f, "{}: {}", self.field, self.message),
        }
    }
}

pub fn validate_instance(instance: &Instance) -> Vec<InstanceViolation> {
    let mut out = Vec::new();
    let mut push = |target_id, field, message: String| {
        out.push(InstanceViolation {
            target_id,
            field,
            message,
        })
    };

    let a = &instance.satellite.attrs;
    for (field, v) in [
        ("cone_angle_deg", a.cone_angle_deg),
        ("max_roll_deg", a.max_roll_deg),
        ("max_pitch_deg", a.max_pitch_deg),
        ("max_yaw_deg", a.max_yaw_deg),
        ("min_image_duration_s", a.min_image_duration_s),
    ] {
        if !(v > 0.0) {
            push(None, field, format!("must be strictly positive, got {v}"));
        }
    }
    let h = instance.horizon;
    if !(h.end_s > h.start_s) {
        push(
            None,
            "horizon",
            format!("end {} must exceed start {}", h.end_s, h.start_s),
        );
    }
    if instance.targets.is_empty() {
        push(None, "targets", "instance has no ground targets".into());
    }

    let eps = 1e-9;
    for t in &instance.targets {
        let id = Some(t.id);
        if !(1..=10).contains(&t.priority) {
            push(
                id,
                "priority",
                format!("priority out of [1,10]: {}", t.priority),
            );
        }
        if !(t.vtw_begin_s < t.vtw_end_s) {
            push(
                id,
                "vtw",
                format!(
                    "visible window begin {} is not before end {}",
                    t.vtw_begin_s, t.vtw_end_s
                ),
            );
        }
        if !h.contains(t.vtw_begin_s) || !h.contains(t.vtw_end_s) {
            push(id, "vtw", "visible window leaves the horizon".into());
        }
        if !(t.congestion >= 0.0) {
            push(id, "congestion", format!("negative congestion {}", t.congestion));
        }
        if !(3..=6).contains(&t.polygon.len()) {
            push(
                id,
                "polygon",
                format!("vertex count {} out of [3,6]", t.polygon.len()),
            );
        }
        for ow in &t.candidate_ows {
            if !(ow.begin_s < ow.end_s) {
                push(id, "candidate_ows", format!("window {} has empty span", ow.id));
            }
            if ow.strips.is_empty() || ow.strips.len() > MAX_STRIPS {
                push(
                    id,
                    "candidate_ows",
                    format!("window {} has {} strips", ow.id, ow.strips.len()),
                );
            }
            if let Some(first) = ow.strips.first() {
                if ow.strips.iter().any(|s| s.duration_s != first.duration_s) {
                    push(
                        id,
                        "candidate_ows",
                        format!("window {} mixes strip durations", ow.id),
                    );
                }
                if first.duration_s < a.min_image_duration_s {
                    push(
                        id,
                        "candidate_ows",
                        format!("window {} strips shorter than minimum duration", ow.id),
                    );
                }
            }
            if ow.dos_deg < 0.0 || ow.dos_deg >= 360.0 {
                push(id, "candidate_ows", format!("window {} dos out of [0,360)", ow.id));
            }
            let last_end = ow
                .strips
                .iter()
                .map(|s| s.offset_s + s.duration_s)
                .fold(0.0, f64::max);
            if last_end > ow.span_s() + eps {
                push(
                    id,
                    "candidate_ows",
                    format!("window {} span does not cover its strips", ow.id),
                );
            }
        }
    }
    out
}

/// Re-derives every cached field of `schedule` from the instance.
pub fn recompute_objectives(
    schedule: &Schedule,
    instance: &Instance,
    params: &ObjectiveParams,
) -> Result<Schedule> {
    Evaluator::new(instance, *params).recompute(schedule)
}
