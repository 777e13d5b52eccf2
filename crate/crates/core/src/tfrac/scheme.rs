//! The time recursion S^n V^n = F^n − D U^{n−1} − Σ_{j<n} ω_{nj} M V^j,
//! S^n = ω_{nn} M + ½ D, U^n = U^{n−1} + V^n.

use std::io::Write as _;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::expsum::{phi, ExpSum};
use super::weights::{GradedTimeMesh, HistoryWeights};
use crate::error::{Error, Result};
use crate::fem::pcg::{pcg, PcgOptions};
use crate::fem::{DofVector, EnvelopeCholesky, FemSpace, InitialData, SparseSymMatrix, Source};

/// How each S^n V = r system is solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverStrategy {
    /// Factor S^n at every step.
    Direct,
    /// Conjugate gradients preconditioned by factors of ω̂ M + ½ D(0) on a decade grid of step sizes.
    Pcg,
    /// Direct below `auto_threshold` unknowns, PCG above.
    #[default]
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverOptions {
    pub strategy: SolverStrategy,
    pub auto_threshold: usize,
    pub cg_rtol: f64,
    pub cg_max_iter: usize,
    /// Relative tolerance of the exponential-sum history; `None` sums directly.
    pub fast_history: Option<f64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { strategy: SolverStrategy::Auto, auto_threshold: 3000, cg_rtol: 1e-10, cg_max_iter: 500, fast_history: None }
    }
}

/// Decade preconditioners: (τ̂, chol(ω_{3−α}(τ̂)/τ̂² M + ½ D(0))).
#[derive(Debug)]
pub struct DecadePreconditioners {
    entries: Vec<(f64, EnvelopeCholesky)>,
}

impl DecadePreconditioners {
    pub fn new(space: &FemSpace, time: &GradedTimeMesh, alpha: f64, d0: &SparseSymMatrix) -> Result<Self> {
        let lo = time.min_step().log10().floor() as i32;
        let hi = time.max_step().log10().ceil() as i32;
        let g3 = crate::numeric::gamma(3.0 - alpha);
        let mut entries = Vec::new();
        for l in lo..=hi {
            let tau = 10f64.powi(l);
            let s = space.mass().linear_combination(tau.powf(-alpha) / g3, d0, 0.5);
            entries.push((tau, EnvelopeCholesky::factor(space.symbolic(), &s)?));
        }
        Ok(Self { entries })
    }

    /// Factor with τ̂ = argmin |τ_n − τ̂|.
    pub fn select(&self, tau_n: f64) -> &EnvelopeCholesky {
        let mut best = &self.entries[0];
        for e in &self.entries {
            if (tau_n - e.0).abs() < (tau_n - best.0).abs() {
                best = e;
            }
        }
        &best.1
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Everything about the scheme that is shared by all trajectories.
#[derive(Debug)]
pub struct Scheme {
    space: Arc<FemSpace>,
    time: GradedTimeMesh,
    weights: HistoryWeights,
    loads: Vec<DofVector>,
    initial: InitialData,
    options: SolverOptions,
    use_pcg: bool,
    precond: Option<DecadePreconditioners>,
    expsum: Option<ExpSum>,
}

/// Solution levels U^0..U^{N_t} (optional) and L(U^n) at every level.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionTrajectory {
    pub times: Vec<f64>,
    pub functional: Vec<f64>,
    pub states: Option<Vec<DofVector>>,
    pub cg_iterations: usize,
}

impl Scheme {
    /// `d0` (the stiffness at y = 0) is required when PCG is selected.
    pub fn new(
        space: Arc<FemSpace>,
        time: GradedTimeMesh,
        alpha: f64,
        source: &Source,
        initial: InitialData,
        options: SolverOptions,
        d0: Option<&SparseSymMatrix>,
    ) -> Result<Self> {
        let weights = HistoryWeights::new(&time, alpha)?;
        let loads = (1..=time.steps()).map(|n| space.load_vector(source, time.t(n - 1), time.t(n))).collect::<Result<_>>()?;
        let use_pcg = match options.strategy {
            SolverStrategy::Direct => false,
            SolverStrategy::Pcg => true,
            SolverStrategy::Auto => space.n_dofs() > options.auto_threshold,
        };
        let precond = if use_pcg {
            let d0 = d0.ok_or_else(|| Error::Config("the PCG solver needs the mean-field stiffness D(0)".into()))?;
            Some(DecadePreconditioners::new(&space, &time, alpha, d0)?)
        } else {
            None
        };
        let expsum = match options.fast_history {
            Some(eps) if time.steps() > 2 => {
                // far-field arguments satisfy t − s ≥ min step
                Some(ExpSum::new(alpha, time.min_step(), time.t_final(), 1e-2 * eps, 4000)?)
            }
            _ => None,
        };
        Ok(Self { space, time, weights, loads, initial, options, use_pcg, precond, expsum })
    }

    pub fn space(&self) -> &Arc<FemSpace> {
        &self.space
    }

    pub fn time(&self) -> &GradedTimeMesh {
        &self.time
    }

    pub fn weights(&self) -> &HistoryWeights {
        &self.weights
    }

    pub fn uses_pcg(&self) -> bool {
        self.use_pcg
    }

    pub fn expsum(&self) -> Option<&ExpSum> {
        self.expsum.as_ref()
    }

    /// Runs the recursion for stiffness `d` (with κ at the quadrature points
    /// `kappa_q` for the Ritz initial value).
    pub fn solve(&self, d: &SparseSymMatrix, kappa_q: &[f64], keep_states: bool) -> Result<SolutionTrajectory> {
        let sp = &*self.space;
        let m = sp.mass();
        let nd = sp.n_dofs();
        let nt = self.time.steps();

        let u0 = sp.ritz_projection_with(d, kappa_q, &self.initial)?;
        let mut u = u0.clone();
        let mut functional = Vec::with_capacity(nt + 1);
        functional.push(sp.apply_functional(&u));
        let mut states = keep_states.then(|| vec![u0]);

        let mut mv: Vec<DofVector> = Vec::with_capacity(nt);
        let mut s = SparseSymMatrix::zeros(sp.pattern().clone());
        let mut chol: Option<EnvelopeCholesky> = None;
        let mut last_diag = f64::NAN;
        let mut rhs = vec![0.0; nd];
        let mut du = vec![0.0; nd];
        let mut v = vec![0.0; nd];
        let mut work = vec![0.0; nd];
        let mut cg_total = 0;
        let mut z_hist: Vec<Vec<f64>> = self.expsum.as_ref().map(|e| vec![vec![0.0; nd]; e.len()]).unwrap_or_default();

        for n in 1..=nt {
            let tau_n = self.time.step(n);
            let row = self.weights.row(n);
            d.mul_vec_into(&u, &mut du);
            for ((r, f), a) in rhs.iter_mut().zip(&self.loads[n - 1]).zip(&du) {
                *r = f - a;
            }
            match &self.expsum {
                Some(es) if n >= 3 => {
                    // Z_k ← e^{−a_k τ_{n−1}} (Z_k + φ(a_k τ_{n−2}) M V^{n−2}), then far field Σ_k w_k φ(a_k τ_n) Z_k
                    let tau_prev = self.time.step(n - 1);
                    let tau_pp = self.time.step(n - 2);
                    for (k, zk) in z_hist.iter_mut().enumerate() {
                        let a = es.rates[k];
                        let (decay, ph) = ((-a * tau_prev).exp(), phi(a * tau_pp));
                        for (zi, x) in zk.iter_mut().zip(&mv[n - 3]) {
                            *zi = decay * (*zi + ph * x);
                        }
                        let c = es.weights[k] * phi(a * tau_n);
                        for (r, zi) in rhs.iter_mut().zip(zk.iter()) {
                            *r -= c * zi;
                        }
                    }
                    let w = row[n - 2];
                    for (r, x) in rhs.iter_mut().zip(&mv[n - 2]) {
                        *r -= w * x;
                    }
                }
                _ => {
                    for (j, x) in mv.iter().enumerate() {
                        let w = row[j];
                        for (r, xi) in rhs.iter_mut().zip(x) {
                            *r -= w * xi;
                        }
                    }
                }
            }
            let diag = row[n - 1];
            if self.use_pcg {
                let prec = self.precond.as_ref().unwrap().select(tau_n);
                s.set_linear_combination(diag, m, 0.5, d);
                // previous increment as the initial guess
                cg_total += pcg(&s, &rhs, &mut v, prec, Some(m), PcgOptions { rtol: self.options.cg_rtol, max_iter: self.options.cg_max_iter })?;
            } else {
                if diag != last_diag {
                    s.set_linear_combination(diag, m, 0.5, d);
                    match chol.as_mut() {
                        Some(c) => c.refactor(&s)?,
                        None => chol = Some(EnvelopeCholesky::factor(sp.symbolic(), &s)?),
                    }
                    last_diag = diag;
                }
                chol.as_ref().unwrap().solve_into(&rhs, &mut v, &mut work);
            }
            for (ui, vi) in u.iter_mut().zip(&v) {
                *ui += vi;
            }
            mv.push(m.mul_vec(&v));
            functional.push(sp.apply_functional(&u));
            if let Some(st) = states.as_mut() {
                st.push(u.clone());
            }
        }
        Ok(SolutionTrajectory { times: self.time.levels().to_vec(), functional, states, cg_iterations: cg_total })
    }
}

/// Σ_{j<n} ω_{nj} M V^j from stored products `mv[j−1] = M V^j`. With an
/// exponential sum the terms j ≤ n−2 use the surrogate kernel; the j = n−1
/// term (and short histories) are summed directly.
pub fn fast_history_apply(time: &GradedTimeMesh, weights: &HistoryWeights, expsum: Option<&ExpSum>, mv: &[DofVector], n: usize) -> DofVector {
    assert!(n >= 1 && mv.len() >= n - 1);
    let nd = mv.first().map_or(0, |v| v.len());
    let mut out = vec![0.0; nd];
    let row = weights.row(n);
    let direct_from = match expsum {
        Some(es) if n >= 3 => {
            let tau_n = time.step(n);
            let t_prev = time.t(n - 1);
            for (a, w) in es.rates.iter().zip(&es.weights) {
                let c = w * phi(a * tau_n);
                for (j, x) in mv.iter().enumerate().take(n - 2) {
                    let jj = j + 1;
                    let f = c * (-a * (t_prev - time.t(jj))).exp() * phi(a * time.step(jj));
                    for (o, xi) in out.iter_mut().zip(x) {
                        *o += f * xi;
                    }
                }
            }
            n - 2
        }
        _ => 0,
    };
    for (j, x) in mv.iter().enumerate().take(n - 1).skip(direct_from) {
        for (o, xi) in out.iter_mut().zip(x) {
            *o += row[j] * xi;
        }
    }
    out
}

/// Binary dump: magic `FQTJ`, u32 d_h, u64 level count (all little endian), then f64 data.
pub fn write_states(path: &Path, states: &[DofVector]) -> Result<()> {
    let dh = states.first().map_or(0, |s| s.len());
    let mut buf = Vec::with_capacity(16 + 8 * dh * states.len());
    buf.extend_from_slice(b"FQTJ");
    buf.extend_from_slice(&(dh as u32).to_le_bytes());
    buf.extend_from_slice(&(states.len() as u64).to_le_bytes());
    for s in states {
        for v in s {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&buf).map_err(|e| Error::io(path, e))
}

pub fn read_states(path: &Path) -> Result<Vec<DofVector>> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let perr = |message: &str| Error::Parse { path: path.to_path_buf(), line: 0, message: message.into() };
    if bytes.len() < 16 || &bytes[..4] != b"FQTJ" {
        return Err(perr("missing trajectory header"));
    }
    let dh = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let levels = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
    if bytes.len() != 16 + 8 * dh * levels {
        return Err(perr("payload length does not match the header"));
    }
    Ok(bytes[16..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect::<Vec<_>>()
        .chunks(dh.max(1))
        .take(levels)
        .map(|c| c.to_vec())
        .collect())
}
