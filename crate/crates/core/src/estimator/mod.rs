//! QMC estimation of E(L(û_h(t_n))) over the truncated parameter domain,
//! with convergence, truncation and space-time refinement studies.

pub mod config;
pub mod output;

use std::sync::Arc;

use rayon::prelude::*;

pub use config::{EstimatorConfig, FieldSpec, FunctionalSpec, InitialSpec, ModelConfig, OutputConfig, QmcConfig, RunConfig, SpaceConfig, TimeConfig};

use crate::error::{Error, Result};
use crate::fem::{Dofs, FemSpace, QuadratureField, TriMesh};
use crate::field::RandomField;
use crate::numeric::{loglog_slope, pairwise_sum};
use crate::qmc::{cbc_construct, default_modulus, load_gen_vector, InterlacedLatticeRule, SpodWeights, VectorSource};
use crate::tfrac::{l2_spacetime_norm, l2_time_norm, GradedTimeMesh, Scheme, SolutionTrajectory};

/// Discretization shared by every sample of a run.
#[derive(Debug)]
pub struct Problem {
    config: RunConfig,
    field: RandomField,
    space: Arc<FemSpace>,
    qfield: QuadratureField,
    scheme: Scheme,
}

impl Problem {
    pub fn new(config: &RunConfig) -> Result<Self> {
        config.validate()?;
        let mesh = match &config.space.mesh {
            Some(p) => TriMesh::read(p)?,
            None => TriMesh::unit_square(config.space.n_div)?,
        };
        let field = config.field.build()?.truncated(config.z())?;
        Self::with_parts(config, Arc::new(mesh), field)
    }

    /// Uses the given mesh and field (truncated to `config.z()`).
    pub fn with_parts(config: &RunConfig, mesh: Arc<TriMesh>, field: RandomField) -> Result<Self> {
        let z = config.z();
        let field = if field.len() > z { field.truncated(z)? } else { field };
        let space = Arc::new(FemSpace::new(mesh, Dofs::Interior)?);
        let qfield = QuadratureField::new(&space, &field, field.len())?;
        let d0 = space.stiffness_from_quadrature(&qfield.kappa(&[])?)?;
        let m = &config.model;
        let time = GradedTimeMesh::new(m.t_final, config.time.steps, config.gamma())?;
        let scheme = Scheme::new(space.clone(), time, m.alpha, &m.source_term(), m.initial_data(), config.time.solver, Some(&d0))?;
        Ok(Self { config: config.clone(), field, space, qfield, scheme })
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn field(&self) -> &RandomField {
        &self.field
    }

    pub fn space(&self) -> &Arc<FemSpace> {
        &self.space
    }

    pub fn scheme(&self) -> &Scheme {
        &self.scheme
    }

    pub fn time(&self) -> &GradedTimeMesh {
        self.scheme.time()
    }

    /// Trajectory for the parameter vector y (missing trailing entries are zero).
    pub fn trajectory(&self, y: &[f64], keep_states: bool) -> Result<SolutionTrajectory> {
        if let Some(v) = y.iter().find(|v| !(v.abs() <= 0.5)) {
            return Err(Error::invalid("y", format!("coordinate {v} outside [-1/2, 1/2]")));
        }
        let kq = self.qfield.kappa(y)?;
        let d = self.space.stiffness_from_quadrature(&kq)?;
        self.scheme.solve(&d, &kq, keep_states)
    }

    /// Rule with b^m points in `z` dimensions: from the configured file, or
    /// built by CBC with weights from the field.
    pub fn rule(&self, m: usize, z: usize) -> Result<InterlacedLatticeRule> {
        let q = &self.config.qmc;
        if z > self.field.len() {
            return Err(Error::Config(format!("rule dimension {z} exceeds the {} field modes", self.field.len())));
        }
        if let Some(path) = &q.genvec {
            let r = load_gen_vector(path)?;
            if (r.b(), r.m(), r.beta()) != (q.b, m, q.beta) {
                return Err(Error::Config(format!(
                    "generating vector {} has (b, m, beta) = ({}, {}, {}), run needs ({}, {m}, {})",
                    path.display(),
                    r.b(),
                    r.m(),
                    r.beta(),
                    q.b,
                    q.beta
                )));
            }
            return r.truncated(z);
        }
        let modulus = default_modulus(q.b, m)?;
        let weights = SpodWeights::from_field(&self.field);
        let cbc = cbc_construct(q.b, m, q.beta, z, &modulus, &weights)?;
        InterlacedLatticeRule::new(q.b, m, q.beta, z, modulus, cbc.gen_vector, VectorSource::Cbc)
    }

    /// Equal-weight QMC estimate of the functional at every time level.
    pub fn estimate_with(&self, rule: &InterlacedLatticeRule, threads: usize) -> Result<ExpectedValueSeries> {
        let ys = rule.parameter_vectors()?;
        let values = run_samples(threads, ys.len(), |j| Ok(self.trajectory(ys[j].coords(), false)?.functional))?;
        Ok(reduce(&values, self.time().levels(), rule.z(), self.space.mesh().h(), self.time().steps()))
    }

    /// Estimate with the configured rule (N = b^m, z from the config).
    pub fn estimate(&self, threads: usize) -> Result<ExpectedValueSeries> {
        let rule = self.rule(self.config.qmc.m, self.field.len())?;
        self.estimate_with(&rule, threads)
    }
}

/// Runs `f(0..n)` on a pool of `threads` workers; results keep index order and
/// the failure with the smallest index is reported.
pub fn run_samples<T: Send>(threads: usize, n: usize, f: impl Fn(usize) -> Result<T> + Sync) -> Result<Vec<T>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start {threads} worker threads: {e}")))?;
    let slots: Vec<Result<T>> = pool.install(|| (0..n).into_par_iter().map(&f).collect());
    slots.into_iter().enumerate().map(|(index, r)| r.map_err(|e| Error::Sample { index, source: Box::new(e) })).collect()
}

/// E and σ at every level from per-sample functional values.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedValueSeries {
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    /// Unbiased sample standard deviation (0 for a single sample).
    pub std: Vec<f64>,
    pub n_points: usize,
    pub z: usize,
    pub h: f64,
    pub steps: usize,
}

impl ExpectedValueSeries {
    pub fn final_value(&self) -> f64 {
        *self.mean.last().unwrap()
    }
}

/// Fixed-order reduction: pairwise sums over the sample index for each level.
pub fn reduce(values: &[Vec<f64>], times: &[f64], z: usize, h: f64, steps: usize) -> ExpectedValueSeries {
    let n = values.len();
    let mut mean = Vec::with_capacity(times.len());
    let mut std = Vec::with_capacity(times.len());
    let mut col = vec![0.0; n];
    for k in 0..times.len() {
        for (c, v) in col.iter_mut().zip(values) {
            *c = v[k];
        }
        let mu = pairwise_sum(&col) / n as f64;
        for c in col.iter_mut() {
            *c = (*c - mu) * (*c - mu);
        }
        mean.push(mu);
        std.push(if n > 1 { (pairwise_sum(&col) / (n - 1) as f64).sqrt() } else { 0.0 });
    }
    ExpectedValueSeries { times: times.to_vec(), mean, std, n_points: n, z, h, steps }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub n_points: usize,
    pub value_t: f64,
    pub err_t: f64,
    pub rate_t: Option<f64>,
    pub err_l2j: f64,
    pub rate_l2j: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    pub reference: ExpectedValueSeries,
    pub series: Vec<ExpectedValueSeries>,
}

fn log_b(b: u32, n: usize) -> Result<usize> {
    let mut m = 0;
    let mut p = 1usize;
    while p < n {
        p *= b as usize;
        m += 1;
    }
    if p != n || n == 0 {
        return Err(Error::Config(format!("{n} is not a power of {b}")));
    }
    Ok(m)
}

/// Errors against the estimate with `n_ref` points on the same mesh, time levels and z.
pub fn convergence_table(problem: &Problem, n_list: &[usize], n_ref: usize, threads: usize) -> Result<ConvergenceTable> {
    let b = problem.config().qmc.b;
    let z = problem.field().len();
    if n_list.iter().any(|n| *n > n_ref) {
        return Err(Error::Config(format!("reference size {n_ref} is smaller than a table entry")));
    }
    let reference = problem.estimate_with(&problem.rule(log_b(b, n_ref)?, z)?, threads)?;
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    let mut series = Vec::new();
    for &n in n_list {
        let s = if n == n_ref { reference.clone() } else { problem.estimate_with(&problem.rule(log_b(b, n)?, z)?, threads)? };
        if s.times != reference.times {
            return Err(Error::Config("time levels differ between table rows".into()));
        }
        let err_t = (s.final_value() - reference.final_value()).abs();
        let diff: Vec<f64> = s.mean.iter().zip(&reference.mean).map(|(a, r)| a - r).collect();
        let err_l2j = l2_time_norm(&s.times, &diff);
        let rate = |prev: f64, cur: f64, np: usize| (prev / cur).ln() / (n as f64 / np as f64).ln();
        let (rate_t, rate_l2j) = match rows.last() {
            Some(p) => (Some(rate(p.err_t, err_t, p.n_points)), Some(rate(p.err_l2j, err_l2j, p.n_points))),
            None => (None, None),
        };
        rows.push(ConvergenceRow { n_points: n, value_t: s.final_value(), err_t, rate_t, err_l2j, rate_l2j });
        series.push(s);
    }
    Ok(ConvergenceTable { rows, reference, series })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncationRow {
    pub z: usize,
    pub value_t: f64,
    pub err_t: f64,
}

#[derive(Debug, Clone)]
pub struct TruncationStudy {
    pub rows: Vec<TruncationRow>,
    pub z_ref: usize,
    /// Least-squares slope of log err against log z over rows with z < z_ref.
    pub slope: f64,
}

/// |E_z(T) − E_{z_ref}(T)| with a fixed N = b^m; every z uses a prefix of the z_ref rule.
pub fn truncation_study(problem: &Problem, z_list: &[usize], m: usize, threads: usize) -> Result<TruncationStudy> {
    let z_ref = problem.field().len();
    if let Some(z) = z_list.iter().find(|z| **z == 0 || **z > z_ref) {
        return Err(Error::Config(format!("truncation dimension {z} outside 1..={z_ref}")));
    }
    let rule = problem.rule(m, z_ref)?;
    let reference = problem.estimate_with(&rule, threads)?.final_value();
    let mut rows = Vec::new();
    for &z in z_list {
        let v = if z == z_ref { reference } else { problem.estimate_with(&rule.truncated(z)?, threads)?.final_value() };
        rows.push(TruncationRow { z, value_t: v, err_t: (v - reference).abs() });
    }
    let fit: Vec<&TruncationRow> = rows.iter().filter(|r| r.z < z_ref).collect();
    let slope = loglog_slope(&fit.iter().map(|r| r.z as f64).collect::<Vec<_>>(), &fit.iter().map(|r| r.err_t).collect::<Vec<_>>());
    Ok(TruncationStudy { rows, z_ref, slope })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefinementRow {
    pub n_div: usize,
    pub steps: usize,
    pub h: f64,
    /// ‖u_h − u_ref‖_{L²(J,Ω)}
    pub err_l2j: f64,
    /// err(previous level) / err(this level)
    pub ratio: Option<f64>,
}

/// Simultaneous halving of h and τ at a fixed y; the reference is two
/// doublings beyond the finest compared level.
pub fn spacetime_refinement_study(config: &RunConfig, levels: usize, y: &[f64]) -> Result<Vec<RefinementRow>> {
    if config.space.mesh.is_some() {
        return Err(Error::Config("refinement needs the structured unit-square mesh".into()));
    }
    if levels == 0 {
        return Err(Error::invalid("levels", "must be at least 1"));
    }
    let at = |factor: usize| -> Result<(Problem, SolutionTrajectory)> {
        let mut c = config.clone();
        c.space.n_div = config.space.n_div * factor;
        c.time.steps = config.time.steps * factor;
        let p = Problem::new(&c)?;
        let t = p.trajectory(y, true)?;
        Ok((p, t))
    };
    let ref_factor = 1 << (levels + 1);
    let (rp, rt) = at(ref_factor)?;
    let ref_states = rt.states.as_ref().unwrap();
    let ref_mesh = rp.space().mesh().clone();
    let ref_vertices: Vec<[f64; 2]> = ref_mesh.vertices().iter().zip(ref_mesh.interior_index()).filter_map(|(x, d)| d.map(|_| *x)).collect();
    let mut rows: Vec<RefinementRow> = Vec::new();
    for l in 0..levels {
        let (p, t) = at(1 << l)?;
        let states = t.states.as_ref().unwrap();
        let mesh = p.space().mesh();
        // nested in space: evaluating the coarse P1 function at fine vertices is exact
        let lifted: Vec<Vec<f64>> = states
            .iter()
            .map(|u| {
                let vv = p.space().vertex_values(u);
                ref_vertices.iter().map(|x| mesh.evaluate(&vv, *x)).collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        let s = ref_factor >> l;
        let diff: Vec<Vec<f64>> = (0..ref_states.len())
            .map(|k| {
                let (c, r) = (k / s, k % s);
                let u = if r == 0 {
                    lifted[c].clone()
                } else {
                    let (ta, tb) = (t.times[c], t.times[c + 1]);
                    let w = (rt.times[k] - ta) / (tb - ta);
                    lifted[c].iter().zip(&lifted[c + 1]).map(|(a, b)| (1.0 - w) * a + w * b).collect()
                };
                u.iter().zip(&ref_states[k]).map(|(a, b)| a - b).collect()
            })
            .collect();
        let err = l2_spacetime_norm(&rt.times, &diff, rp.space().mass());
        let ratio = rows.last().map(|r| r.err_l2j / err);
        rows.push(RefinementRow { n_div: config.space.n_div << l, steps: config.time.steps << l, h: mesh.h(), err_l2j: err, ratio });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> RunConfig {
        let mut c = RunConfig::default();
        c.field = FieldSpec::PaperExample { q: 3, scaling: Default::default() };
        c.space.n_div = 6;
        c.time.steps = 8;
        c.qmc.m = 3;
        c
    }

    #[test]
    fn zero_data_estimate_vanishes() {
        let mut c = small();
        c.model.source = 0.0;
        c.model.initial = InitialSpec::Zero;
        let p = Problem::new(&c).unwrap();
        assert!(p.scheme().space().n_dofs() > 0);
        let s = p.estimate(1).unwrap();
        assert!(s.mean.iter().chain(&s.std).all(|v| *v == 0.0));
    }

    #[test]
    fn single_point_is_the_corner_trajectory() {
        let c = small();
        let p = Problem::new(&c).unwrap();
        let rule = p.rule(1, p.field().len()).unwrap();
        // N = 2: the first point is the origin, shifted to (−½, …, −½)
        let s = p.estimate_with(&rule, 1).unwrap();
        let y0 = vec![-0.5; p.field().len()];
        let y1: Vec<f64> = rule.parameter_vectors().unwrap()[1].coords().to_vec();
        let (a, b) = (p.trajectory(&y0, false).unwrap(), p.trajectory(&y1, false).unwrap());
        for k in 0..s.times.len() {
            assert_eq!(s.mean[k], (a.functional[k] + b.functional[k]) / 2.0);
        }
    }

    #[test]
    fn same_n_gives_zero_error() {
        let p = Problem::new(&small()).unwrap();
        let t = convergence_table(&p, &[4, 8], 8, 2).unwrap();
        assert_eq!(t.rows[1].err_t, 0.0);
        assert!(t.rows[0].rate_t.is_none() && t.rows[1].rate_t.is_some());
        assert!(convergence_table(&p, &[6], 8, 1).is_err());
    }

    #[test]
    fn sample_errors_name_the_index() {
        let e = run_samples(2, 5, |j| if j >= 3 { Err(Error::Config("x".into())) } else { Ok(j) }).unwrap_err();
        assert!(matches!(e, Error::Sample { index: 3, .. }));
    }
}
