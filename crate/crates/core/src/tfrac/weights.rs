//! Graded time mesh and the convolution weights of the Caputo scheme.

use crate::error::{Error, Result};
use crate::numeric::gamma;

/// Levels t_n = (nτ)^γ, τ = T^{1/γ}/N_t.
#[derive(Debug, Clone, PartialEq)]
pub struct GradedTimeMesh {
    t_final: f64,
    steps: usize,
    gamma: f64,
    levels: Vec<f64>,
}

impl GradedTimeMesh {
    pub fn new(t_final: f64, steps: usize, gamma: f64) -> Result<Self> {
        if !(t_final > 0.0 && t_final.is_finite()) {
            return Err(Error::invalid("T", "must be positive and finite"));
        }
        if steps == 0 {
            return Err(Error::invalid("N_t", "must be at least 1"));
        }
        if !(gamma >= 1.0 && gamma.is_finite()) {
            return Err(Error::invalid("gamma", "must be at least 1"));
        }
        // (nτ)^γ = T (n/N_t)^γ, which makes t_{N_t} = T exact
        let levels = (0..=steps).map(|n| t_final * (n as f64 / steps as f64).powf(gamma)).collect();
        Ok(Self { t_final, steps, gamma, levels })
    }

    pub fn uniform(t_final: f64, steps: usize) -> Result<Self> {
        Self::new(t_final, steps, 1.0)
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// τ = T^{1/γ}/N_t.
    pub fn tau(&self) -> f64 {
        self.t_final.powf(1.0 / self.gamma) / self.steps as f64
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn t(&self, n: usize) -> f64 {
        self.levels[n]
    }

    /// τ_n = t_n − t_{n−1} for n ≥ 1.
    pub fn step(&self, n: usize) -> f64 {
        self.levels[n] - self.levels[n - 1]
    }

    pub fn min_step(&self) -> f64 {
        (1..=self.steps).map(|n| self.step(n)).fold(f64::INFINITY, f64::min)
    }

    pub fn max_step(&self) -> f64 {
        (1..=self.steps).map(|n| self.step(n)).fold(0.0, f64::max)
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid("alpha", format!("{alpha} is outside (0, 1)")))
    }
}

/// x^μ((1 + q/x)^μ − 1) = (x+q)^μ − x^μ without cancellation.
fn forward_difference(x: f64, q: f64, mu: f64) -> f64 {
    x.powf(mu) * (mu * (q / x).ln_1p()).exp_m1()
}

/// (d+p+q)^μ − (d+p)^μ − (d+q)^μ + d^μ divided by p q, for μ = 2 − α.
fn mixed_difference(d: f64, p: f64, q: f64, mu: f64) -> f64 {
    let (big, small) = if p >= q { (p, q) } else { (q, p) };
    if d == 0.0 {
        return (forward_difference(big, small, mu) - small.powf(mu)) / (p * q);
    }
    let (u, v) = (p / d, q / d);
    if u + v <= 0.5 {
        // d^{μ−2} Σ_{k≥2} C(μ,k) s_k, with e_k = (u+v)^k − u^k − v^k = uv s_k
        let mut s = 2.0;
        let mut binom = mu * (mu - 1.0) / 2.0;
        let (mut uk, mut vk) = (u, v);
        let mut sum = binom * s;
        for k in 2..200 {
            s = (u + v) * s + uk + vk;
            uk *= u;
            vk *= v;
            binom *= (mu - k as f64) / (k as f64 + 1.0);
            let term = binom * s;
            sum += term;
            if term.abs() <= 1e-17 * sum.abs() {
                break;
            }
        }
        return d.powf(mu - 2.0) * sum;
    }
    (forward_difference(d + big, small, mu) - forward_difference(d, small, mu)) / (p * q)
}

/// ω^α_{nj} for j = 1..n (returned at index j − 1).
pub fn history_weights(mesh: &GradedTimeMesh, alpha: f64, n: usize) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    if n == 0 || n > mesh.steps() {
        return Err(Error::invalid("n", format!("step index {n} outside 1..={}", mesh.steps())));
    }
    let mu = 2.0 - alpha;
    let g3 = gamma(3.0 - alpha);
    let tn = mesh.step(n);
    let mut row = Vec::with_capacity(n);
    for j in 1..n {
        let d = mesh.t(n - 1) - mesh.t(j);
        row.push(mixed_difference(d, tn, mesh.step(j), mu) / g3);
    }
    row.push(tn.powf(-alpha) / g3);
    Ok(row)
}

/// g_j = (j+1)^{2−α} − 2 j^{2−α} + (j−1)^{2−α}, j ≥ 1. For j ≥ 2 the even
/// binomial series 2 j^μ Σ_{k≥1} C(μ, 2k) j^{−2k} avoids the cancellation.
pub fn toeplitz_generator(alpha: f64, j: usize) -> f64 {
    let mu = 2.0 - alpha;
    if j == 1 {
        return 2f64.powf(mu) - 2.0;
    }
    let x = 1.0 / (j as f64 * j as f64);
    let (mut c, mut xp, mut sum) = (1.0, 1.0, 0.0);
    for k in 1..200 {
        // C(μ, 2k) from C(μ, 2k−2)
        let k2 = 2.0 * k as f64;
        c *= (mu - k2 + 2.0) * (mu - k2 + 1.0) / ((k2 - 1.0) * k2);
        xp *= x;
        let term = c * xp;
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    2.0 * (j as f64).powf(mu) * sum
}

/// ω^α = τ^{−α}/Γ(3−α) for a uniform step τ.
pub fn uniform_scale(alpha: f64, tau: f64) -> f64 {
    tau.powf(-alpha) / gamma(3.0 - alpha)
}

/// All rows ω^α_{n·}, n = 1..N_t.
#[derive(Debug, Clone)]
pub struct HistoryWeights {
    alpha: f64,
    rows: Vec<Vec<f64>>,
}

impl HistoryWeights {
    pub fn new(mesh: &GradedTimeMesh, alpha: f64) -> Result<Self> {
        let rows = (1..=mesh.steps()).map(|n| history_weights(mesh, alpha, n)).collect::<Result<_>>()?;
        Ok(Self { alpha, rows })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// ω^α_{nj}, 1 ≤ j ≤ n.
    pub fn get(&self, n: usize, j: usize) -> f64 {
        self.rows[n - 1][j - 1]
    }

    pub fn row(&self, n: usize) -> &[f64] {
        &self.rows[n - 1]
    }

    pub fn diagonal(&self, n: usize) -> f64 {
        self.rows[n - 1][n - 1]
    }
}
