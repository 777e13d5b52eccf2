//! Exponential-sum surrogate of the kernel ω_{1−α}(t) = t^{−α}/Γ(1−α) on
//! [δ, T], from the trapezoid rule applied to
//! t^{−α} = Γ(α)^{-1} ∫_ℝ exp(αx − t eˣ) dx.

use crate::error::{Error, Result};
use crate::numeric::gamma;

/// ω_{1−α}(t) ≈ Σ_k w_k exp(−a_k t).
#[derive(Debug, Clone)]
pub struct ExpSum {
    pub alpha: f64,
    pub rates: Vec<f64>,
    pub weights: Vec<f64>,
    /// Validity interval.
    pub range: (f64, f64),
    /// Largest sampled relative error on the range.
    pub max_rel_error: f64,
}

const SAMPLES_PER_DECADE: usize = 100;

impl ExpSum {
    /// Builds a sum whose relative error stays below `tol` on [δ, T].
    pub fn new(alpha: f64, delta: f64, t_final: f64, tol: f64, max_terms: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::invalid("alpha", format!("{alpha} is outside (0, 1)")));
        }
        if !(delta > 0.0 && delta < t_final) {
            return Err(Error::invalid("delta", "need 0 < δ < T"));
        }
        if !(tol > 0.0) {
            return Err(Error::invalid("tolerance", "must be positive"));
        }
        let scale = 1.0 / (gamma(alpha) * gamma(1.0 - alpha));
        let ln_tol = tol.ln();
        // upper limit: t eˣ large enough that exp(−δ eˣ) is negligible
        let x_hi = ((-ln_tol + 5.0).max(1.0) * 1.2 / delta).ln();
        // lower limit: the tail ∫_{−∞}^{x} e^{αs} ds = e^{αx}/α below tol·T^{−α}·Γ(α)
        let x_lo = (ln_tol - 3.0 + alpha.ln() + (gamma(alpha)).ln() - alpha * t_final.ln()) / alpha;
        let mut h = 2.0 * std::f64::consts::PI * std::f64::consts::PI / (-ln_tol + 3.0);
        for _ in 0..40 {
            let k0 = (x_lo / h).floor() as i64;
            let k1 = (x_hi / h).ceil() as i64;
            if (k1 - k0 + 1) as usize > max_terms * 4 {
                break;
            }
            let rates: Vec<f64> = (k0..=k1).map(|k| (k as f64 * h).exp()).collect();
            let weights: Vec<f64> = (k0..=k1).map(|k| scale * h * (alpha * k as f64 * h).exp()).collect();
            let full = Self { alpha, rates, weights, range: (delta, t_final), max_rel_error: 0.0 };
            let err = full.sampled_error();
            if err <= tol {
                let mut best = full.with_error(err);
                // merge slowly decaying terms (a_k T ≪ 1) into one
                for cut in [1.0, 0.3, 0.1, 0.03, 0.01, 1e-3, 1e-4, 1e-5, 1e-6] {
                    let merged = best.merge_below(cut / t_final);
                    let e = merged.sampled_error();
                    if e <= tol {
                        best = merged.with_error(e);
                        break;
                    }
                }
                if best.rates.len() > max_terms {
                    return Err(Error::ToleranceNotAchievable { tolerance: tol, max_terms });
                }
                return Ok(best);
            }
            h *= 0.85;
        }
        Err(Error::ToleranceNotAchievable { tolerance: tol, max_terms })
    }

    fn with_error(mut self, e: f64) -> Self {
        self.max_rel_error = e;
        self
    }

    fn merge_below(&self, a_cut: f64) -> Self {
        let (mut lw, mut la) = (0.0, 0.0);
        let mut rates = Vec::new();
        let mut weights = Vec::new();
        for (a, w) in self.rates.iter().zip(&self.weights) {
            if *a < a_cut {
                lw += w;
                la += w * a;
            } else {
                rates.push(*a);
                weights.push(*w);
            }
        }
        if lw > 0.0 {
            rates.insert(0, la / lw);
            weights.insert(0, lw);
        }
        Self { alpha: self.alpha, rates, weights, range: self.range, max_rel_error: 0.0 }
    }

    pub fn len(&self) -> usize {
        self.rates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.rates.iter().zip(&self.weights).map(|(a, w)| w * (-a * t).exp()).sum()
    }

    fn exact(&self, t: f64) -> f64 {
        t.powf(-self.alpha) / gamma(1.0 - self.alpha)
    }

    fn sampled_error(&self) -> f64 {
        let (lo, hi) = (self.range.0.ln(), self.range.1.ln());
        let n = (((hi - lo) / std::f64::consts::LN_10) * SAMPLES_PER_DECADE as f64).ceil().max(2.0) as usize;
        (0..=n)
            .map(|i| {
                let t = (lo + (hi - lo) * i as f64 / n as f64).exp();
                let ex = self.exact(t);
                ((self.eval(t) - ex) / ex).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// (1 − e^{−x})/x, stable near 0.
pub(crate) fn phi(x: f64) -> f64 {
    if x < 1e-8 {
        1.0 - 0.5 * x
    } else {
        -(-x).exp_m1() / x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accuracy_on_graded_range() {
        for alpha in [0.3, 0.5, 0.8] {
            let e = ExpSum::new(alpha, 2e-9, 1.0, 1e-10, 1000).unwrap();
            assert!(e.max_rel_error <= 1e-10);
            // off-grid check
            for t in [3.3e-9f64, 1.7e-6, 0.0123, 0.77, 1.0] {
                let ex = t.powf(-alpha) / gamma(1.0 - alpha);
                assert!(((e.eval(t) - ex) / ex).abs() < 2e-10, "α={alpha} t={t}");
            }
        }
    }

    #[test]
    fn term_cap_is_reported() {
        let e = ExpSum::new(0.5, 1e-9, 1.0, 1e-10, 5).unwrap_err();
        assert!(matches!(e, Error::ToleranceNotAchievable { max_terms: 5, .. }));
    }

    #[test]
    fn phi_is_smooth() {
        assert!((phi(1e-9) - (1.0 - 5e-10)).abs() < 1e-16);
        assert!((phi(1.0) - (1.0 - (-1.0f64).exp())).abs() < 1e-16);
    }
}
