use thiserror::Error;

use crate::model::PartitionMode;

#[derive(Debug, Error)]
pub enum MospError {
    #[error("attitude change must be non-negative, got {0}")]
    NegativeAngle(f64),

    #[error("attitude outside the admissible range: pitch {pitch} deg, roll {roll} deg")]
    AngleOutOfRange { pitch: f64, roll: f64 },

    #[error("observation window {ow_id} yields no quality samples")]
    NoQualitySamples { ow_id: u32 },

    #[error("strip index {index} out of range for observation window {ow_id}")]
    StripIndex { ow_id: u32, index: usize },

    #[error("moment {u} outside imaging interval [{begin}, {end}] of strip {strip}")]
    OutsideStrip {
        strip: usize,
        u: f64,
        begin: f64,
        end: f64,
    },

    #[error("assignment {position}: target index {target_index} is not in the instance")]
    UnknownTarget {
        position: usize,
        target_index: usize,
    },

    #[error("assignment {position}: target {target_id} has no observation window {ow_id}")]
    UnknownWindow {
        position: usize,
        target_id: u32,
        ow_id: u32,
    },

    #[error("schedule is not sorted by begin moment at position {0}")]
    UnsortedSchedule(usize),

    #[error("normaliser must be positive, got {0}")]
    NonPositiveMax(f64),

    #[error("front point ({f1}, {f2}) lies beyond the reference point ({r1}, {r2})")]
    BeyondReference { f1: f64, f2: f64, r1: f64, r2: f64 },

    #[error("no visible time window longer than the minimum image duration after {0} attempts")]
    DegenerateWindow(usize),

    #[error("observation strip count {count} exceeds the maximum of {max}")]
    TooManyStrips { count: usize, max: usize },

    #[error("instance candidates were built for {found:?}, solver asked for {expected:?}")]
    PartitionMismatch {
        expected: PartitionMode,
        found: PartitionMode,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported schema version {found}, expected {expected}")]
    SchemaVersion { found: u32, expected: u32 },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = MospError> = std::result::Result<T, E>;
