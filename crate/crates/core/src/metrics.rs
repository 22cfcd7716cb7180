//! Hypervolume, front extraction and summary statistics for run reports.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{MospError, Result};
use crate::moea::ParetoArchive;

pub const REFERENCE: [f64; 2] = [1.0, 1.0];

/// Objective vectors closer than this in both coordinates count as equal.
pub const DEDUP_TOLERANCE: f64 = 1e-9;

/// Mutually nondominated objective vectors, ascending in `f1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Front {
    pub points: Vec<[f64; 2]>,
    pub reference: [f64; 2],
}

#[derive(Debug, Serialize, Deserialize)]
struct FrontRow {
    f1: f64,
    f2: f64,
}

impl Front {
    /// Builds a front from arbitrary points, dropping dominated and
    /// duplicate ones.
    pub fn new(points: &[[f64; 2]], reference: [f64; 2]) -> Self {
        Self {
            points: nondominated_points(points),
            reference,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for p in &self.points {
            out.serialize(FrontRow { f1: p[0], f2: p[1] })?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let mut points = Vec::new();
        for row in rdr.deserialize() {
            let row: FrontRow = row?;
            points.push([row.f1, row.f2]);
        }
        Ok(Front::new(&points, REFERENCE))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }
}

/// Nondominated subset, deduplicated and sorted by `f1` ascending (so `f2`
/// strictly descends).
pub fn nondominated_points(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let mut out: Vec<[f64; 2]> = Vec::with_capacity(sorted.len());
    for p in sorted {
        match out.last() {
            Some(last) if p[1] >= last[1] - DEDUP_TOLERANCE => {}
            _ => out.push(p),
        }
    }
    out
}

/// Exact area dominated by the front and bounded by its reference point.
pub fn hypervolume(front: &Front) -> Result<f64> {
    hypervolume_of(&front.points, front.reference)
}

/// Hypervolume of any point set; dominated points contribute nothing.
pub fn hypervolume_of(points: &[[f64; 2]], reference: [f64; 2]) -> Result<f64> {
    if let Some(p) = points.iter().find(|p| p[0] > reference[0] || p[1] > reference[1]) {
        return Err(MospError::BeyondReference {
            f1: p[0],
            f2: p[1],
            r1: reference[0],
            r2: reference[1],
        });
    }
    let nd = nondominated_points(points);
    let mut hv = 0.0;
    for (i, p) in nd.iter().enumerate() {
        let next = nd.get(i + 1).map_or(reference[0], |q| q[0]);
        hv += (next - p[0]) * (reference[1] - p[1]);
    }
    Ok(hv)
}

/// Hypervolume on the reporting scale (times 1000).
pub fn report_hv(front: &Front) -> Result<f64> {
    Ok(1000.0 * hypervolume(front)?)
}

/// Nondominated objective vectors of an archive, against the unit reference.
pub fn extract_front(archive: &ParetoArchive) -> Front {
    let pts: Vec<[f64; 2]> = archive.members.iter().map(|s| s.objectives()).collect();
    Front::new(&pts, REFERENCE)
}

/// Five-number summary plus mean, for box plots.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
}

/// Quantile with linear interpolation between order statistics.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let h = q * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn summarize(values: &[f64]) -> Summary {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Summary {
        n,
        min: v.first().copied().unwrap_or(f64::NAN),
        q1: quantile(&v, 0.25),
        median: quantile(&v, 0.5),
        q3: quantile(&v, 0.75),
        max: v.last().copied().unwrap_or(f64::NAN),
        mean: if n == 0 { f64::NAN } else { v.iter().sum::<f64>() / n as f64 },
    }
}
