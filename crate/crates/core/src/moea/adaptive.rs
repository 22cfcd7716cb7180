//! Operator scores, weights and roulette selection.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::heuristics::{DestroyOp, RepairOp};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveLayer {
    pub lambda: f64,
    pub destroy_weights: [f64; 4],
    pub repair_weights: [f64; 4],
    pub destroy_scores: [f64; 4],
    pub repair_scores: [f64; 4],
}

impl AdaptiveLayer {
    pub fn new(lambda: f64) -> Self {
        Self {
            lambda,
            destroy_weights: [0.25; 4],
            repair_weights: [0.25; 4],
            destroy_scores: [0.0; 4],
            repair_scores: [0.0; 4],
        }
    }

    pub fn destroy_utilization(&self) -> [f64; 4] {
        utilization(&self.destroy_weights)
    }

    pub fn repair_utilization(&self) -> [f64; 4] {
        utilization(&self.repair_weights)
    }

    pub fn roulette_destroy<R: Rng>(&self, rng: &mut R) -> DestroyOp {
        DestroyOp::ALL[roulette(&self.destroy_weights, rng)]
    }

    pub fn roulette_repair<R: Rng>(&self, rng: &mut R) -> RepairOp {
        RepairOp::ALL[roulette(&self.repair_weights, rng)]
    }

    pub fn credit(&mut self, d: DestroyOp, r: RepairOp, sigma: f64) {
        self.destroy_scores[d.index()] += sigma;
        self.repair_scores[r.index()] += sigma;
    }

    /// Blends the weights towards this iteration's score shares, then clears
    /// the scores.
    pub fn update_weights(&mut self) {
        blend(&mut self.destroy_weights, &self.destroy_scores, self.lambda);
        blend(&mut self.repair_weights, &self.repair_scores, self.lambda);
        self.destroy_scores = [0.0; 4];
        self.repair_scores = [0.0; 4];
    }
}

fn blend(weights: &mut [f64; 4], scores: &[f64; 4], lambda: f64) {
    let total: f64 = scores.iter().sum();
    if total <= 0.0 {
        return;
    }
    for (w, s) in weights.iter_mut().zip(scores) {
        *w = (1.0 - lambda) * *w + lambda * s / total;
    }
}

/// Selection probabilities; uniform when every weight is zero.
pub fn utilization(weights: &[f64; 4]) -> [f64; 4] {
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return [0.25; 4];
    }
    weights.map(|w| w / total)
}

pub fn roulette<R: Rng>(weights: &[f64; 4], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return rng.gen_range(0..4);
    }
    let mut u = rng.gen::<f64>() * total;
    for (i, w) in weights.iter().enumerate() {
        if u < *w {
            return i;
        }
        u -= w;
    }
    // round-off: fall back to the last operator with weight
    weights.iter().rposition(|w| *w > 0.0).unwrap_or(3)
}
