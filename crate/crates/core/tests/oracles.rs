mod common;

use mosp_core::metrics::{hypervolume, hypervolume_of, Front, REFERENCE};
use mosp_core::moea::{dominates, fast_nondominated_sort};
use mosp_core::rng::stream;
use proptest::prelude::*;
use rand::Rng;

fn random_points(seed: u64, n: usize, grid: bool) -> Vec<[f64; 2]> {
    let mut rng = stream(seed, &[]);
    (0..n)
        .map(|_| {
            if grid {
                // coarse values force ties and duplicates
                [rng.gen_range(0..6) as f64 / 5.0, rng.gen_range(0..6) as f64 / 5.0]
            } else {
                [rng.gen::<f64>(), rng.gen::<f64>()]
            }
        })
        .collect()
}

#[test]
fn nondominated_sort_matches_peeling_oracle() {
    for seed in 0..100u64 {
        let n = 1 + (seed as usize * 7) % 64;
        let pts = random_points(seed, n, seed % 3 == 0);
        let fronts = fast_nondominated_sort(&pts);
        let oracle = common::peel_fronts(&pts);
        let mut seen = vec![false; n];
        for (r, front) in fronts.iter().enumerate() {
            for &i in front {
                assert!(!seen[i], "point {i} in two fronts");
                seen[i] = true;
                assert_eq!(oracle[i], r, "seed {seed} point {i}");
            }
        }
        assert!(seen.iter().all(|&s| s));
    }
}

#[test]
fn incomparable_points_form_one_front() {
    let pts: Vec<[f64; 2]> = (0..10).map(|i| [i as f64 / 10.0, 1.0 - i as f64 / 10.0]).collect();
    assert_eq!(fast_nondominated_sort(&pts).len(), 1);
}

#[test]
fn hypervolume_matches_inclusion_exclusion_for_small_fronts() {
    assert!((common::inclusion_exclusion(&[[0.2, 0.8], [0.8, 0.2]], REFERENCE) - 0.28).abs() < 1e-12);
    let mut rng = stream(17, &[]);
    for _ in 0..2000 {
        let n = rng.gen_range(1..=3);
        let pts: Vec<[f64; 2]> = (0..n).map(|_| [rng.gen::<f64>(), rng.gen::<f64>()]).collect();
        let hv = hypervolume_of(&pts, REFERENCE).unwrap();
        assert!((hv - common::inclusion_exclusion(&pts, REFERENCE)).abs() < 1e-12, "{pts:?}");
    }
}

#[test]
fn hypervolume_matches_monte_carlo() {
    let mut rng = stream(23, &[]);
    for case in 0..5 {
        let n = 5 + case * 3;
        let pts: Vec<[f64; 2]> = (0..n).map(|_| [rng.gen::<f64>(), rng.gen::<f64>()]).collect();
        let exact = hypervolume_of(&pts, REFERENCE).unwrap();
        let samples = 1_000_000;
        let hits = (0..samples)
            .filter(|_| {
                let u = [rng.gen::<f64>(), rng.gen::<f64>()];
                pts.iter().any(|p| p[0] <= u[0] && p[1] <= u[1])
            })
            .count();
        let estimate = hits as f64 / samples as f64;
        assert!((exact - estimate).abs() < 1e-2, "n={n}: {exact} vs {estimate}");
    }
}

fn arb_points(max: usize) -> impl Strategy<Value = Vec<[f64; 2]>> {
    prop::collection::vec((0.0f64..=1.0, 0.0f64..=1.0).prop_map(|(a, b)| [a, b]), 0..max)
}

proptest! {
    #[test]
    fn hypervolume_is_permutation_invariant(pts in arb_points(20), seed in any::<u64>()) {
        let mut shuffled = pts.clone();
        let mut rng = stream(seed, &[]);
        rand::seq::SliceRandom::shuffle(shuffled.as_mut_slice(), &mut rng);
        let a = hypervolume_of(&pts, REFERENCE).unwrap();
        let b = hypervolume_of(&shuffled, REFERENCE).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn adding_points_never_loses_area(pts in arb_points(20), extra in (0.0f64..=1.0, 0.0f64..=1.0)) {
        let before = hypervolume_of(&pts, REFERENCE).unwrap();
        let mut more = pts.clone();
        more.push([extra.0, extra.1]);
        let after = hypervolume_of(&more, REFERENCE).unwrap();
        let dominated = pts.iter().any(|p| p[0] <= extra.0 && p[1] <= extra.1);
        if dominated {
            prop_assert_eq!(after, before);
        } else {
            prop_assert!(after >= before);
        }
    }

    #[test]
    fn fronts_are_sorted_and_mutually_nondominated(pts in arb_points(30)) {
        let f = Front::new(&pts, REFERENCE);
        for w in f.points.windows(2) {
            prop_assert!(w[0][0] < w[1][0]);
            prop_assert!(w[0][1] > w[1][1]);
        }
        for a in &f.points {
            for b in &f.points {
                prop_assert!(!dominates(a, b));
            }
        }
        prop_assert!(hypervolume(&f).unwrap() >= 0.0);
    }
}
