#![allow(dead_code)]

use mosp_core::geometry::{attitude_at, generate_instance, InstanceSpec};
use mosp_core::model::{Attitude, Distribution, Instance, Schedule};

pub fn cd(n: usize, seed: u64) -> Instance {
    generate_instance(&InstanceSpec::new(Distribution::Cd, n, seed)).unwrap()
}

/// Slew time written out branch by branch.
pub fn slew_oracle(dg: f64) -> f64 {
    if dg <= 10.0 {
        35.0 / 3.0
    } else if dg <= 30.0 {
        5.0 + dg / 1.5
    } else if dg <= 60.0 {
        10.0 + dg / 2.0
    } else if dg <= 90.0 {
        16.0 + dg / 2.5
    } else {
        22.0 + dg / 3.0
    }
}

fn dg(a: &Attitude, b: &Attitude) -> f64 {
    (a.pitch_deg - b.pitch_deg).abs() + (a.roll_deg - b.roll_deg).abs() + (a.yaw_deg - b.yaw_deg).abs()
}

/// Pairwise scan of every constraint. Attitudes come from the geometry's
/// strip profiles, window ends from the strip layout.
pub fn brute_force_violations(s: &Schedule, inst: &Instance) -> Vec<String> {
    let eps = 1e-9;
    let d0 = inst.satellite.attrs.min_image_duration_s;
    let mut out = Vec::new();
    let mut placed = Vec::new();
    for a in &s.assignments {
        let t = &inst.targets[a.target_index];
        let ow = t
            .candidate_ows
            .iter()
            .find(|w| w.id == a.ow_id)
            .expect("window exists")
            .instantiate(a.begin_s);
        let last = ow.strips.len() - 1;
        let (lb, le) = ow.strip_interval(last).unwrap();
        let begin_att = attitude_at(&ow, 0, a.begin_s).unwrap();
        let end_att = attitude_at(&ow, last, le).unwrap();
        assert!(le >= lb);
        if a.begin_s < t.vtw_begin_s - eps || le > t.vtw_end_s + eps {
            out.push(format!("target {} outside its window", t.id));
        }
        for st in &ow.strips {
            if st.duration_s < d0 - eps {
                out.push(format!("target {} strip too short", t.id));
            }
        }
        placed.push((t.id, a.begin_s, le, begin_att, end_att));
    }
    for i in 0..placed.len() {
        for j in i + 1..placed.len() {
            let (id_i, b_i, e_i, _, end_i) = placed[i];
            let (id_j, b_j, _, begin_j, _) = placed[j];
            if id_i == id_j {
                out.push(format!("target {id_i} twice"));
            }
            if b_j <= b_i {
                out.push(format!("targets {id_i} and {id_j} out of order"));
            }
            if b_j < e_i - eps {
                out.push(format!("targets {id_i} and {id_j} overlap"));
            }
            if j == i + 1 && b_j - e_i < slew_oracle(dg(&end_i, &begin_j)) - eps {
                out.push(format!("targets {id_i} and {id_j} too close to slew"));
            }
        }
    }
    out
}

/// Front index of every point by repeatedly peeling off the undominated rest.
pub fn peel_fronts(points: &[[f64; 2]]) -> Vec<usize> {
    let n = points.len();
    let mut rank = vec![usize::MAX; n];
    let mut r = 0;
    while rank.contains(&usize::MAX) {
        let layer: Vec<usize> = (0..n)
            .filter(|&i| rank[i] == usize::MAX)
            .filter(|&i| {
                !(0..n).any(|j| {
                    rank[j] == usize::MAX
                        && points[j][0] <= points[i][0]
                        && points[j][1] <= points[i][1]
                        && points[j] != points[i]
                })
            })
            .collect();
        for i in layer {
            rank[i] = r;
        }
        r += 1;
    }
    rank
}

/// Area of the union of the boxes `[p, r]`, by inclusion and exclusion.
pub fn inclusion_exclusion(points: &[[f64; 2]], r: [f64; 2]) -> f64 {
    let n = points.len();
    let mut total = 0.0;
    for mask in 1u32..(1 << n) {
        let mut lo = [f64::NEG_INFINITY; 2];
        for (i, p) in points.iter().enumerate() {
            if mask & (1 << i) != 0 {
                lo[0] = lo[0].max(p[0]);
                lo[1] = lo[1].max(p[1]);
            }
        }
        let area = (r[0] - lo[0]).max(0.0) * (r[1] - lo[1]).max(0.0);
        if mask.count_ones() % 2 == 1 {
            total += area;
        } else {
            total -= area;
        }
    }
    total
}
