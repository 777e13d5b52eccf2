//! Small numerical helpers shared across modules.

/// Γ(x) for real x.
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// Riemann–Liouville kernel ω_μ(t) = t^{μ-1} / Γ(μ), for t > 0.
pub fn omega(mu: f64, t: f64) -> f64 {
    t.powf(mu - 1.0) / gamma(mu)
}

/// Riemann zeta function for real s > 1.
///
/// Partial sum up to `n - 1` followed by the Euler–Maclaurin tail: the
/// integral term, the half endpoint term and five Bernoulli corrections.
pub fn zeta(s: f64) -> f64 {
    assert!(s > 1.0, "zeta is only implemented for s > 1");
    const N: usize = 16;
    // B_2, B_4, ..., B_10
    const BERNOULLI: [f64; 5] = [1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0, 5.0 / 66.0];
    let n = N as f64;
    let head: f64 = (1..N).rev().map(|k| (k as f64).powf(-s)).sum();
    let mut tail = n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s);
    // rising factorial s (s+1) ... (s+2k-2) divided by (2k)!
    let mut rising = s;
    let mut fact = 2.0;
    for (k, b) in BERNOULLI.iter().enumerate() {
        let k = k + 1;
        tail += b / fact * rising * n.powf(-s - 2.0 * k as f64 + 1.0);
        let a = 2.0 * k as f64;
        rising *= (s + a - 1.0) * (s + a);
        fact *= (a + 1.0) * (a + 2.0);
    }
    head + tail
}

/// Pairwise (cascade) summation in fixed index order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 8;
    if values.len() <= LEAF {
        let mut s = 0.0;
        for v in values {
            s += v;
        }
        return s;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Least-squares slope of log(y) against log(x). Pairs with a non-positive
/// entry are skipped; returns NaN when fewer than two pairs remain.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_matches_known_values() {
        let pi4 = std::f64::consts::PI.powi(4);
        assert!((zeta(4.0) - pi4 / 90.0).abs() < 1e-15);
        assert!((zeta(2.0) - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-14);
        // Apéry's constant
        assert!((zeta(3.0) - 1.202_056_903_159_594_2).abs() < 1e-15);
    }

    #[test]
    fn zeta_agrees_with_brute_force_sum() {
        // 10^7 terms plus the integral tail n^{1-s}/(s-1) - n^{-s}/2
        let n = 10_000_000usize;
        for s in [3.0f64, 4.0] {
            let mut brute = 0.0;
            for k in (1..=n).rev() {
                brute += (k as f64).powf(-s);
            }
            let nf = n as f64;
            brute += nf.powf(1.0 - s) / (s - 1.0) - 0.5 * nf.powf(-s);
            assert!((brute - zeta(s)).abs() < 1e-12, "s = {s}");
        }
    }

    #[test]
    fn gamma_values() {
        assert!((gamma(2.5) - 1.329_340_388_179_137).abs() < 1e-14);
        assert!((gamma(0.5) - std::f64::consts::PI.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn pairwise_matches_naive_on_integers() {
        let v: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 499_500.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }

    #[test]
    fn slope_of_power_law() {
        let x: Vec<f64> = (1..10).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v.powf(-1.5)).collect();
        assert!((loglog_slope(&x, &y) + 1.5).abs() < 1e-12);
    }
}
