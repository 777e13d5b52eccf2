mod common;

use std::sync::Arc;

use fracuq::fem::{Dofs, FemSpace, TriMesh};
use fracuq::tfrac::{fast_history_apply, l2_time_norm, ExpSum, GradedTimeMesh, HistoryWeights};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn fast_history_matches_direct_sum() {
    let space = FemSpace::new(Arc::new(TriMesh::unit_square(8).unwrap()), Dofs::Interior).unwrap();
    let m = space.mass();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (alpha, gamma) in [(0.5, 4.0), (0.3, 1.0), (0.8, 2.5)] {
        let time = GradedTimeMesh::new(1.0, 100, gamma).unwrap();
        let w = HistoryWeights::new(&time, alpha).unwrap();
        let es = ExpSum::new(alpha, time.min_step(), 1.0, 1e-2 * 1e-8, 4000).unwrap();
        let mv: Vec<Vec<f64>> = (0..100).map(|_| m.mul_vec(&(0..space.n_dofs()).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<f64>>())).collect();
        for n in 1..=100 {
            let direct = fast_history_apply(&time, &w, None, &mv, n);
            let fast = fast_history_apply(&time, &w, Some(&es), &mv, n);
            let diff: Vec<f64> = direct.iter().zip(&fast).map(|(a, b)| a - b).collect();
            let norm = m.quadratic_form(&direct).sqrt();
            if n <= 2 {
                assert_eq!(direct, fast);
            } else {
                assert!(m.quadratic_form(&diff).sqrt() <= 1e-8 * norm, "alpha {alpha} step {n}");
            }
        }
    }
}

#[test]
fn direct_history_sum_is_the_weighted_row() {
    let time = GradedTimeMesh::new(1.0, 6, 2.0).unwrap();
    let w = HistoryWeights::new(&time, 0.4).unwrap();
    let mv: Vec<Vec<f64>> = (0..6).map(|j| vec![j as f64 + 1.0, 1.0]).collect();
    let got = fast_history_apply(&time, &w, None, &mv, 5);
    let want: f64 = (1..5).map(|j| w.get(5, j) * (j as f64)).sum();
    let ones: f64 = (1..5).map(|j| w.get(5, j)).sum();
    assert!((got[0] - want).abs() <= 1e-13 * want);
    assert!((got[1] - ones).abs() <= 1e-13 * ones);
}

#[test]
fn time_norm_of_hat_profile_matches_quadrature() {
    let time = GradedTimeMesh::new(2.0, 13, 1.7).unwrap();
    let levels = time.levels();
    let hat = |t: f64| 1.0 - (t - 1.0).abs();
    let values: Vec<f64> = levels.iter().map(|t| hat(*t)).collect();
    let ours = l2_time_norm(levels, &values);
    // quadrature of the square of the piecewise-linear interpolant
    let interp = |t: f64| {
        let n = levels.iter().position(|l| *l >= t).unwrap().max(1);
        let (a, b) = (levels[n - 1], levels[n]);
        values[n - 1] + (values[n] - values[n - 1]) * (t - a) / (b - a)
    };
    let mut q = 0.0;
    for n in 1..levels.len() {
        q += common::integrate(&|t| interp(t).powi(2), levels[n - 1], levels[n], 1e-14);
    }
    assert!((ours - q.sqrt()).abs() <= 1e-12 * ours);
}
