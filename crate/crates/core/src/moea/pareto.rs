//! Nondominated sorting, crowding, elite selection and the box-method filter.

use serde::{Deserialize, Serialize};

use crate::metrics::{hypervolume_of, DEDUP_TOLERANCE, REFERENCE};
use crate::model::Schedule;

/// Score values for an offspring that dominates the whole front, dominates
/// part of it, is incomparable to it, or is dominated.
pub const SIGMA: [f64; 4] = [30.0, 20.0, 10.0, 0.0];

pub fn dominates(a: &[f64; 2], b: &[f64; 2]) -> bool {
    a[0] <= b[0] && a[1] <= b[1] && (a[0] < b[0] || a[1] < b[1])
}

fn same_point(a: &[f64; 2], b: &[f64; 2]) -> bool {
    (a[0] - b[0]).abs() <= DEDUP_TOLERANCE && (a[1] - b[1]).abs() <= DEDUP_TOLERANCE
}

/// Fronts of indices into `points`, best first.
pub fn fast_nondominated_sort(points: &[[f64; 2]]) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut dominated_by_me: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut count = vec![0usize; n];
    for i in 0..n {
        for j in 0..n {
            if dominates(&points[i], &points[j]) {
                dominated_by_me[i].push(j);
            } else if dominates(&points[j], &points[i]) {
                count[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominated_by_me[i] {
                count[j] -= 1;
                if count[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    fronts
}

/// Crowding distance of each member of `front`, in the same order.
pub fn crowding_distance(points: &[[f64; 2]], front: &[usize]) -> Vec<f64> {
    let m = front.len();
    let mut dist = vec![0.0; m];
    if m <= 2 {
        return vec![f64::INFINITY; m];
    }
    for obj in 0..2 {
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| {
            points[front[a]][obj]
                .total_cmp(&points[front[b]][obj])
                .then(front[a].cmp(&front[b]))
        });
        let lo = points[front[order[0]]][obj];
        let hi = points[front[order[m - 1]]][obj];
        dist[order[0]] = f64::INFINITY;
        dist[order[m - 1]] = f64::INFINITY;
        if hi - lo <= 0.0 {
            continue;
        }
        for k in 1..m - 1 {
            let gap = points[front[order[k + 1]]][obj] - points[front[order[k - 1]]][obj];
            dist[order[k]] += gap / (hi - lo);
        }
    }
    dist
}

/// First index of each group of objective-space duplicates.
pub fn distinct_indices(points: &[[f64; 2]]) -> Vec<usize> {
    let mut keep: Vec<usize> = Vec::with_capacity(points.len());
    for (i, p) in points.iter().enumerate() {
        if !keep.iter().any(|&k| same_point(&points[k], p)) {
            keep.push(i);
        }
    }
    keep
}

/// Every index in crowded-comparison order: front rank, then crowding
/// distance descending, then index.
pub fn crowded_order(points: &[[f64; 2]]) -> Vec<usize> {
    let mut order = Vec::with_capacity(points.len());
    for front in fast_nondominated_sort(points) {
        let cd = crowding_distance(points, &front);
        let mut members: Vec<(usize, f64)> = front.into_iter().zip(cd).collect();
        members.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        order.extend(members.into_iter().map(|(i, _)| i));
    }
    order
}

/// NSGA-II survivor choice over distinct points: indices into `points`.
pub fn elite_indices(points: &[[f64; 2]], capacity: usize) -> Vec<usize> {
    let distinct = distinct_indices(points);
    let sub: Vec<[f64; 2]> = distinct.iter().map(|&i| points[i]).collect();
    crowded_order(&sub)
        .into_iter()
        .take(capacity)
        .map(|k| distinct[k])
        .collect()
}

/// Survivors that never lose hypervolume against `previous_front`.
///
/// Plain crowding truncation can drop a boundary-adjacent point that carried
/// area. When that happens, every previous front point is first anchored by
/// a pool point that weakly dominates it, and the remaining slots are filled
/// in crowded-comparison order.
pub fn elite_indices_monotone(
    points: &[[f64; 2]],
    capacity: usize,
    previous_front: &[[f64; 2]],
) -> Vec<usize> {
    let plain = elite_indices(points, capacity);
    let hv = |idx: &[usize]| {
        let pts: Vec<[f64; 2]> = idx.iter().map(|&i| points[i]).collect();
        hypervolume_of(&pts, REFERENCE).unwrap_or(0.0)
    };
    let before = hypervolume_of(previous_front, REFERENCE).unwrap_or(0.0);
    if hv(&plain) >= before {
        return plain;
    }

    let distinct = distinct_indices(points);
    let sub: Vec<[f64; 2]> = distinct.iter().map(|&i| points[i]).collect();
    let order: Vec<usize> = crowded_order(&sub).into_iter().map(|k| distinct[k]).collect();
    let mut chosen: Vec<usize> = Vec::with_capacity(capacity);
    for p in previous_front {
        // the first match in crowded order is a rank-0 point when one exists
        let anchor = order
            .iter()
            .copied()
            .find(|&i| same_point(&points[i], p) || dominates(&points[i], p));
        if let Some(a) = anchor {
            if !chosen.contains(&a) {
                chosen.push(a);
            }
        }
    }
    for i in order {
        if chosen.len() >= capacity {
            break;
        }
        if !chosen.contains(&i) {
            chosen.push(i);
        }
    }
    chosen
}

/// Elite population with each member's front rank and crowding distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoArchive {
    pub members: Vec<Schedule>,
    pub rank: Vec<usize>,
    /// Boundary members have infinite crowding, stored as `null` in JSON.
    #[serde(with = "unbounded")]
    pub crowding: Vec<f64>,
    pub capacity: usize,
}

mod unbounded {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let opt: Vec<Option<f64>> = v.iter().map(|&x| x.is_finite().then_some(x)).collect();
        opt.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        let opt = Vec::<Option<f64>>::deserialize(d)?;
        Ok(opt.into_iter().map(|x| x.unwrap_or(f64::INFINITY)).collect())
    }
}

impl ParetoArchive {
    pub fn new(members: Vec<Schedule>, capacity: usize) -> Self {
        let points: Vec<[f64; 2]> = members.iter().map(|s| s.objectives()).collect();
        let mut rank = vec![0; members.len()];
        let mut crowding = vec![0.0; members.len()];
        for (r, front) in fast_nondominated_sort(&points).into_iter().enumerate() {
            let cd = crowding_distance(&points, &front);
            for (&i, d) in front.iter().zip(cd) {
                rank[i] = r;
                crowding[i] = d;
            }
        }
        Self {
            members,
            rank,
            crowding,
            capacity,
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn points(&self) -> Vec<[f64; 2]> {
        self.members.iter().map(|s| s.objectives()).collect()
    }

    /// Objective vectors of the rank-0 members, ascending in `f1`.
    pub fn front_points(&self) -> Vec<[f64; 2]> {
        let mut pts: Vec<[f64; 2]> = self
            .members
            .iter()
            .zip(&self.rank)
            .filter(|(_, &r)| r == 0)
            .map(|(s, _)| s.objectives())
            .collect();
        pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
        pts
    }

    pub fn front(&self) -> Vec<&Schedule> {
        self.members
            .iter()
            .zip(&self.rank)
            .filter(|(_, &r)| r == 0)
            .map(|(s, _)| s)
            .collect()
    }

    pub fn hypervolume(&self) -> f64 {
        hypervolume_of(&self.front_points(), REFERENCE).unwrap_or(0.0)
    }
}

fn take_indices(mut pool: Vec<Schedule>, idx: &[usize]) -> Vec<Schedule> {
    let mut slots: Vec<Option<Schedule>> = pool.drain(..).map(Some).collect();
    idx.iter().filter_map(|&i| slots[i].take()).collect()
}

/// Distinct-objective NSGA-II survivors of `pool`.
pub fn select_elites(pool: Vec<Schedule>, capacity: usize) -> ParetoArchive {
    let points: Vec<[f64; 2]> = pool.iter().map(|s| s.objectives()).collect();
    let idx = elite_indices(&points, capacity);
    ParetoArchive::new(take_indices(pool, &idx), capacity)
}

/// Like [`select_elites`], but never lets the front's hypervolume drop
/// below that of `previous`.
pub fn update_elites(previous: &ParetoArchive, pool: Vec<Schedule>, capacity: usize) -> ParetoArchive {
    let points: Vec<[f64; 2]> = pool.iter().map(|s| s.objectives()).collect();
    let idx = elite_indices_monotone(&points, capacity, &previous.front_points());
    ParetoArchive::new(take_indices(pool, &idx), capacity)
}

/// Score of an offspring against the current front.
pub fn score_offspring(offspring: &[f64; 2], front: &[[f64; 2]]) -> f64 {
    if front.iter().any(|p| dominates(p, offspring)) {
        return SIGMA[3];
    }
    if !front.is_empty() && front.iter().all(|p| dominates(offspring, p)) {
        return SIGMA[0];
    }
    if front.iter().any(|p| dominates(offspring, p)) {
        return SIGMA[1];
    }
    SIGMA[2]
}

/// True when the offspring lies in the region no front member dominates.
pub fn box_accept(offspring: &[f64; 2], front: &[[f64; 2]]) -> bool {
    !front.iter().any(|p| dominates(p, offspring))
}
