//! L²(0,T) norms of piecewise-linear-in-time interpolants of level data.

use crate::fem::sparse::{dot, SparseSymMatrix};

/// ‖·‖_{L²(J)} of the piecewise linear interpolant of `values` at `levels`.
pub fn l2_time_norm(levels: &[f64], values: &[f64]) -> f64 {
    assert_eq!(levels.len(), values.len());
    let s: f64 = levels
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| (t[1] - t[0]) * (v[0] * v[0] + v[0] * v[1] + v[1] * v[1]) / 3.0)
        .sum();
    s.max(0.0).sqrt()
}

/// ‖·‖_{L²(J; L²(Ω))} of a piecewise linear (in time) FE trajectory, with the mass matrix `m`.
pub fn l2_spacetime_norm(levels: &[f64], states: &[Vec<f64>], m: &SparseSymMatrix) -> f64 {
    assert_eq!(levels.len(), states.len());
    let mv: Vec<Vec<f64>> = states.iter().map(|u| m.mul_vec(u)).collect();
    let mut s = 0.0;
    for n in 1..levels.len() {
        let (a, b) = (&states[n - 1], &states[n]);
        s += (levels[n] - levels[n - 1]) * (dot(a, &mv[n - 1]) + dot(a, &mv[n]) + dot(b, &mv[n])) / 3.0;
    }
    s.max(0.0).sqrt()
}
