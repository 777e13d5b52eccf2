//! Independent oracles shared by the integration tests. Nothing here calls
//! into the library's numerics.

#![allow(dead_code)]

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [0.129484966168869693270611432679082, 0.279705391489276667901467771423780, 0.381830050505118944950369775488975, 0.417959183673469387755102040816327];

fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Globally adaptive Gauss–Kronrod (7/15): bisects the interval with the
/// largest error estimate until the total meets `rtol`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rtol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (v, e) = gk15(f, a, b);
    let mut parts = vec![(a, b, v, e)];
    for _ in 0..5000 {
        let total: f64 = parts.iter().map(|p| p.2).sum();
        let err: f64 = parts.iter().map(|p| p.3).sum();
        if err <= rtol * total.abs() || err <= 50.0 * f64::EPSILON * parts.iter().map(|p| p.2.abs()).sum::<f64>() {
            break;
        }
        let k = (0..parts.len()).max_by(|i, j| parts[*i].3.total_cmp(&parts[*j].3)).unwrap();
        let (lo, hi, _, _) = parts[k];
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let (lv, le) = gk15(f, lo, mid);
        let (rv, re) = gk15(f, mid, hi);
        parts[k] = (lo, mid, lv, le);
        parts.push((mid, hi, rv, re));
    }
    parts.iter().map(|p| p.2).sum()
}

/// ∫_lo^hi u^{−α} du by quadrature after u = w^q, which leaves the smooth
/// integrand q w^{q(1−α)−1} (exponent at least 2).
fn singular_power(alpha: f64, lo: f64, hi: f64, rtol: f64) -> f64 {
    let q = (3.0 / (1.0 - alpha)).ceil();
    let e = q * (1.0 - alpha) - 1.0;
    integrate(&|w: f64| q * w.powf(e), lo.max(0.0).powf(1.0 / q), hi.powf(1.0 / q), rtol)
}

/// (1/(τ_n τ_j)) ∫_{I_n} ∫_{I_j, s<t} (t−s)^{−α}/Γ(1−α) ds dt by nested quadrature.
pub fn weight_by_quadrature(levels: &[f64], alpha: f64, n: usize, j: usize) -> f64 {
    let (tn0, tn1) = (levels[n - 1], levels[n]);
    let (tj0, tj1) = (levels[j - 1], levels[j]);
    let inner = |t: f64| {
        let hi_s = tj1.min(t);
        if hi_s <= tj0 {
            return 0.0;
        }
        if t - hi_s > hi_s - tj0 {
            // away from the singularity: integrate in s, avoiding t − s cancellation in the width
            integrate(&|s: f64| (t - s).powf(-alpha), tj0, hi_s, 1e-14)
        } else {
            singular_power(alpha, t - hi_s, t - tj0, 1e-14)
        }
    };
    // t = t_{n−1} + τ_n r^p smooths the (t − t_{n−1})^{1−α} endpoint behaviour
    let p = (3.0 / (1.0 - alpha)).ceil();
    let tau = tn1 - tn0;
    let v = integrate(&|r: f64| inner(tn0 + tau * r.powf(p)) * p * tau * r.powf(p - 1.0), 0.0, 1.0, 1e-12);
    v / ((tn1 - tn0) * (tj1 - tj0) * libm::tgamma(1.0 - alpha))
}

/// g_j = (j+1)^{2−α} − 2j^{2−α} + (j−1)^{2−α}, evaluated as
/// μ(μ−1) ∫∫_{[0,1]²} (j−1+s+t)^{μ−2} ds dt to avoid the cancellation of the
/// three-term form; j = 1 uses 2^μ − 2 directly.
pub fn generator(alpha: f64, j: usize) -> f64 {
    let mu = 2.0 - alpha;
    if j == 1 {
        return 2f64.powf(mu) - 2.0;
    }
    let base = j as f64 - 1.0;
    let inner = |s: f64| integrate(&|t: f64| (base + s + t).powf(mu - 2.0), 0.0, 1.0, 1e-15);
    mu * (mu - 1.0) * integrate(&inner, 0.0, 1.0, 1e-15)
}

/// Dense Cholesky solve of an SPD system.
pub fn dense_spd_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = a[i][j] - (0..j).map(|k| l[i][k] * l[j][k]).sum::<f64>();
            if i == j {
                assert!(s > 0.0, "matrix is not positive definite");
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        y[i] = (b[i] - (0..i).map(|k| l[i][k] * y[k]).sum::<f64>()) / l[i][i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        x[i] = (y[i] - (i + 1..n).map(|k| l[k][i] * x[k]).sum::<f64>()) / l[i][i];
    }
    x
}

pub fn mat_vec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter().map(|r| r.iter().zip(x).map(|(p, q)| p * q).sum()).collect()
}

/// P1 Galerkin data on the unit square split along each cell's (0,0)–(1,1)
/// diagonal, interior vertices numbered row by row.
pub struct DenseP1 {
    pub n_div: usize,
    pub mass: Vec<Vec<f64>>,
    pub stiffness: Vec<Vec<f64>>,
    pub load: Vec<f64>,
    pub ritz_rhs: Vec<f64>,
}

fn bump_grad(x: [f64; 2]) -> [f64; 2] {
    let (a, b) = (x[0] * x[0] * (1.0 - x[0]), x[1] * x[1] * (1.0 - x[1]));
    [144.0 * (2.0 * x[0] - 3.0 * x[0] * x[0]) * b, 144.0 * a * (2.0 * x[1] - 3.0 * x[1] * x[1])]
}

impl DenseP1 {
    /// κ(x) = (2 + x₁x₂)/10 (element means taken exactly), f = 1 and the
    /// bump initial datum.
    pub fn mean_field_problem(n_div: usize) -> Self {
        let n = n_div;
        let nd = (n - 1) * (n - 1);
        let dof = |i: usize, j: usize| (i > 0 && j > 0 && i < n && j < n).then(|| (j - 1) * (n - 1) + (i - 1));
        let h = 1.0 / n as f64;
        let mut mass = vec![vec![0.0; nd]; nd];
        let mut stiffness = vec![vec![0.0; nd]; nd];
        let mut load = vec![0.0; nd];
        let mut ritz_rhs = vec![0.0; nd];
        for j in 0..n {
            for i in 0..n {
                for tri in [[(i, j), (i + 1, j), (i + 1, j + 1)], [(i, j), (i + 1, j + 1), (i, j + 1)]] {
                    let p: Vec<[f64; 2]> = tri.iter().map(|(a, b)| [*a as f64 * h, *b as f64 * h]).collect();
                    let det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
                    let area = 0.5 * det.abs();
                    // ∇λ_a = rot90(opposite edge) / (2 area)
                    let grads: Vec<[f64; 2]> = (0..3)
                        .map(|a| {
                            let (b, c) = (p[(a + 1) % 3], p[(a + 2) % 3]);
                            [(b[1] - c[1]) / det, (c[0] - b[0]) / det]
                        })
                        .collect();
                    let sx: f64 = p.iter().map(|v| v[0]).sum();
                    let sy: f64 = p.iter().map(|v| v[1]).sum();
                    let sxy: f64 = p.iter().map(|v| v[0] * v[1]).sum();
                    let mean_xy = (sxy + sx * sy) / 12.0;
                    let kbar = (2.0 + mean_xy) / 10.0;
                    let dofs: Vec<Option<usize>> = tri.iter().map(|(a, b)| dof(*a, *b)).collect();
                    // degree-2 three-point rule for the Ritz right-hand side
                    let bary = [[2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0], [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0], [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0]];
                    for a in 0..3 {
                        let Some(pa) = dofs[a] else { continue };
                        load[pa] += area / 3.0;
                        for lam in &bary {
                            let x = [
                                lam[0] * p[0][0] + lam[1] * p[1][0] + lam[2] * p[2][0],
                                lam[0] * p[0][1] + lam[1] * p[1][1] + lam[2] * p[2][1],
                            ];
                            let g = bump_grad(x);
                            let kappa = (2.0 + x[0] * x[1]) / 10.0;
                            ritz_rhs[pa] += area / 3.0 * kappa * (g[0] * grads[a][0] + g[1] * grads[a][1]);
                        }
                        for b in 0..3 {
                            let Some(pb) = dofs[b] else { continue };
                            mass[pa][pb] += area / 12.0 * if a == b { 2.0 } else { 1.0 };
                            stiffness[pa][pb] += kbar * area * (grads[a][0] * grads[b][0] + grads[a][1] * grads[b][1]);
                        }
                    }
                }
            }
        }
        Self { n_div, mass, stiffness, load, ritz_rhs }
    }

    pub fn n_dofs(&self) -> usize {
        self.load.len()
    }

    /// Crank–Nicolson Galerkin on a uniform mesh of `steps` steps over (0, T):
    /// (M + τ/2 D) U^n = (M − τ/2 D) U^{n−1} + τ F.
    pub fn crank_nicolson(&self, t_final: f64, steps: usize) -> Vec<Vec<f64>> {
        let tau = t_final / steps as f64;
        let nd = self.n_dofs();
        let lhs: Vec<Vec<f64>> = (0..nd).map(|i| (0..nd).map(|j| self.mass[i][j] + 0.5 * tau * self.stiffness[i][j]).collect()).collect();
        let mut u = dense_spd_solve(&self.stiffness, &self.ritz_rhs);
        let mut out = vec![u.clone()];
        for _ in 0..steps {
            let mu = mat_vec(&self.mass, &u);
            let du = mat_vec(&self.stiffness, &u);
            let rhs: Vec<f64> = (0..nd).map(|i| mu[i] - 0.5 * tau * du[i] + tau * self.load[i]).collect();
            u = dense_spd_solve(&lhs, &rhs);
            out.push(u.clone());
        }
        out
    }

    /// Interior values from a full (n+1)² vertex array in row-major order.
    pub fn from_vertex_values(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n_div;
        let mut out = Vec::with_capacity(self.n_dofs());
        for j in 1..n {
            for i in 1..n {
                out.push(v[j * (n + 1) + i]);
            }
        }
        out
    }

    /// ‖·‖_{L²(J,Ω)} of a piecewise-linear-in-time series of states.
    pub fn l2j_norm(&self, levels: &[f64], states: &[Vec<f64>]) -> f64 {
        let ip = |a: &[f64], b: &[f64]| mat_vec(&self.mass, a).iter().zip(b).map(|(p, q)| p * q).sum::<f64>();
        let mut s = 0.0;
        for n in 1..levels.len() {
            let (a, b) = (&states[n - 1], &states[n]);
            s += (levels[n] - levels[n - 1]) / 3.0 * (ip(a, a) + ip(a, b) + ip(b, b));
        }
        s.sqrt()
    }
}

/// Polynomials over GF(2) as bit masks (bit k ↔ x^k).
pub fn gf2_mul(a: u64, b: u64) -> u64 {
    let mut r = 0;
    for k in 0..64 - b.leading_zeros() {
        if b >> k & 1 == 1 {
            r ^= a << k;
        }
    }
    r
}

pub fn gf2_rem(mut a: u64, p: u64) -> u64 {
    let dp = 63 - p.leading_zeros();
    while a != 0 && 63 - a.leading_zeros() >= dp {
        a ^= p << (63 - a.leading_zeros() - dp);
    }
    a
}

/// v_m(j g / P) · 2^m by long division.
pub fn lattice_mantissa(j: u64, g: u64, p: u64, m: usize) -> u64 {
    let dp = 63 - p.leading_zeros();
    let mut r = gf2_rem(gf2_mul(j, g), p);
    let mut out = 0;
    for _ in 0..m {
        r <<= 1;
        let digit = r >> dp & 1;
        if digit == 1 {
            r ^= p;
        }
        out = out << 1 | digit;
    }
    out
}

/// Walsh-series kernel Σ_{k≥1} 2^{−λ(⌊log₂k⌋+1)} wal_k(u/2^m). For u ≠ 0
/// terms with k ≥ 2^m cancel in blocks, leaving a finite sum.
pub fn walsh_kernel_series(m: usize, lambda: usize, u: u64) -> f64 {
    if u == 0 {
        return 1.0 / (2f64.powi(lambda as i32) - 2.0);
    }
    // digit i (weight 2^{−i}) of x sits at bit m − i of u
    let mut s = 0.0;
    for k in 1u64..1 << m {
        let a = 64 - k.leading_zeros();
        let mut parity = 0;
        for i in 0..a {
            if k >> i & 1 == 1 {
                parity ^= u >> (m - 1 - i as usize) & 1;
            }
        }
        let r = 2f64.powi(-(lambda as i32) * a as i32);
        s += if parity == 0 { r } else { -r };
    }
    s
}

/// Figure of merit of a partial generating vector by explicit enumeration
/// of subsets u of the touched blocks and of ν ∈ {1:β}^{|u|}.
pub fn merit_by_enumeration(m: usize, beta: usize, p: u64, gens: &[u64], decay: &[f64]) -> f64 {
    let n = 1u64 << m;
    let lambda = beta.max(2);
    let blocks = gens.len().div_ceil(beta);
    let mut total = 0.0;
    for mask in 1u32..1 << blocks {
        let u: Vec<usize> = (0..blocks).filter(|j| mask >> j & 1 == 1).collect();
        // γ_u
        let mut gamma_u = 0.0;
        let mut nu = vec![1usize; u.len()];
        loop {
            let size: usize = nu.iter().sum();
            let mut term: f64 = (1..=size).map(|k| k as f64).product();
            for (idx, j) in u.iter().enumerate() {
                term *= decay[*j].powi(nu[idx] as i32) * if nu[idx] == beta { 2.0 } else { 1.0 };
            }
            gamma_u += term;
            let mut k = 0;
            while k < nu.len() && nu[k] == beta {
                nu[k] = 1;
                k += 1;
            }
            if k == nu.len() {
                break;
            }
            nu[k] += 1;
        }
        let mut avg = 0.0;
        for j in 0..n {
            let mut prod = 1.0;
            for b in &u {
                let mut y = 1.0;
                for c in b * beta..((b + 1) * beta).min(gens.len()) {
                    y *= 1.0 + walsh_kernel_series(m, lambda, lattice_mantissa(j, gens[c], p, m));
                }
                prod *= y - 1.0;
            }
            avg += prod;
        }
        total += gamma_u * avg / n as f64;
    }
    total
}

/// Unbiased sample variance by the two-pass formula.
pub fn two_pass_variance(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
}

/// Least-squares slope of log y against log x.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
