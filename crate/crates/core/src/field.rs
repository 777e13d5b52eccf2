//! Parametric diffusivity κ(x, y) = κ₀(x) + Σ_j y_j ψ_j(x) on the unit square,
//! its truncation to the first z terms, and the sine-product example field.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::zeta;

/// Tolerance used when deciding whether a point lies in the closed unit square.
const DOMAIN_SLACK: f64 = 1e-12;

/// Mean field κ₀.
#[derive(Debug, Clone, PartialEq)]
pub enum MeanField {
    /// c₀ + c₁ x₁ + c₂ x₂ + c₃ x₁ x₂
    Bilinear([f64; 4]),
    Gridded(GriddedFunction),
}

impl MeanField {
    pub fn value(&self, x: [f64; 2]) -> f64 {
        match self {
            MeanField::Bilinear(c) => c[0] + c[1] * x[0] + c[2] * x[1] + c[3] * x[0] * x[1],
            MeanField::Gridded(g) => g.value(x),
        }
    }

    /// Exact extremes over the closed square (both variants attain them at grid nodes/corners).
    pub fn range(&self) -> (f64, f64) {
        match self {
            MeanField::Bilinear(_) => {
                let corners = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]];
                let v: Vec<f64> = corners.iter().map(|c| self.value(*c)).collect();
                (v.iter().cloned().fold(f64::INFINITY, f64::min), v.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
            }
            MeanField::Gridded(g) => g.range(),
        }
    }
}

/// Values on a uniform (n+1)×(n+1) grid of the unit square, bilinearly interpolated.
#[derive(Debug, Clone, PartialEq)]
pub struct GriddedFunction {
    n: usize,
    values: Vec<f64>,
}

impl GriddedFunction {
    /// `values` is row-major with x₁ varying fastest.
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if n == 0 || values.len() != (n + 1) * (n + 1) {
            return Err(Error::invalid("values", format!("expected {} grid values for n = {n}", (n + 1) * (n + 1))));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("values", "non-finite grid value"));
        }
        Ok(Self { n, values })
    }

    pub fn value(&self, x: [f64; 2]) -> f64 {
        let n = self.n as f64;
        let (fx, fy) = (x[0].clamp(0.0, 1.0) * n, x[1].clamp(0.0, 1.0) * n);
        let i = (fx.floor() as usize).min(self.n - 1);
        let j = (fy.floor() as usize).min(self.n - 1);
        let (s, t) = (fx - i as f64, fy - j as f64);
        let at = |a: usize, b: usize| self.values[b * (self.n + 1) + a];
        (1.0 - s) * (1.0 - t) * at(i, j) + s * (1.0 - t) * at(i + 1, j) + (1.0 - s) * t * at(i, j + 1) + s * t * at(i + 1, j + 1)
    }

    fn range(&self) -> (f64, f64) {
        let lo = self.values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }
}

/// One fluctuation mode ψ_j.
#[derive(Debug, Clone, PartialEq)]
pub enum BasisFunction {
    /// amplitude · sin(kπx₁) sin(lπx₂)
    SineProduct { k: u32, l: u32, amplitude: f64 },
    Gridded(GriddedFunction),
}

impl BasisFunction {
    #[inline]
    pub fn value(&self, x: [f64; 2]) -> f64 {
        match self {
            BasisFunction::SineProduct { k, l, amplitude } => {
                amplitude * (*k as f64 * PI * x[0]).sin() * (*l as f64 * PI * x[1]).sin()
            }
            BasisFunction::Gridded(g) => g.value(x),
        }
    }
}

/// Scaling of the sine-product example field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExampleScaling {
    /// κ = (2 + x₁x₂ + Σ y_{k,l} sin(kπx₁) sin(lπx₂)/(M(k+l)⁴)) / 10, so that
    /// 0.15 ≤ κ ≤ 0.35 for every parameter vector.
    #[default]
    Normalized,
    /// κ = (2 + x₁x₂)/10 + Σ y_{k,l} sin(kπx₁) sin(lπx₂)/(M(k+l)⁴). The fluctuation
    /// can reach 1/2 and κ is negative near the centre of the square for some y.
    AsPrinted,
}

/// Parametric diffusivity with precomputed sup-norms of its modes.
#[derive(Debug, Clone)]
pub struct RandomField {
    mean: MeanField,
    basis: Vec<BasisFunction>,
    sup_norms: Vec<f64>,
    summability_p: f64,
    bounds: (f64, f64),
    sorted: bool,
    /// (k, l) labels of sine modes, kept for reporting.
    labels: Vec<Option<(u32, u32)>>,
}

impl RandomField {
    /// Builds a field from explicit sup-norms. Declared bounds are the worst case
    /// min κ₀ − ½Σ‖ψ_j‖ and max κ₀ + ½Σ‖ψ_j‖.
    pub fn with_sup_norms(mean: MeanField, basis: Vec<BasisFunction>, sup_norms: Vec<f64>, summability_p: f64) -> Result<Self> {
        if basis.len() != sup_norms.len() {
            return Err(Error::invalid("sup_norms", "length differs from basis length"));
        }
        if sup_norms.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(Error::invalid("sup_norms", "entries must be finite and nonnegative"));
        }
        if !(summability_p > 0.0 && summability_p < 1.0) {
            return Err(Error::invalid("summability_p", "must lie in (0, 1)"));
        }
        let (lo, hi) = mean.range();
        let half: f64 = 0.5 * sup_norms.iter().sum::<f64>();
        let labels = basis
            .iter()
            .map(|b| match b {
                BasisFunction::SineProduct { k, l, .. } => Some((*k, *l)),
                BasisFunction::Gridded(_) => None,
            })
            .collect();
        Ok(Self { mean, basis, sup_norms, summability_p, bounds: (lo - half, hi + half), sorted: false, labels })
    }

    /// Builds a field whose sup-norms are found by grid maximization on a
    /// `resolution`×`resolution` grid followed by local refinement.
    pub fn new(mean: MeanField, basis: Vec<BasisFunction>, summability_p: f64, resolution: usize) -> Result<Self> {
        if resolution < 2 {
            return Err(Error::invalid("resolution", "must be at least 2"));
        }
        let sup_norms = basis.iter().map(|b| sup_norm_by_search(|x| b.value(x), resolution)).collect();
        Self::with_sup_norms(mean, basis, sup_norms, summability_p)
    }

    /// Example field on (0,1)² with q(q+1)/2 sine modes indexed by l = 1..q,
    /// k = 1..q+1−l, k varying fastest. `M = ζ(3) − ζ(4)` normalizes Σ‖ψ‖ to 1
    /// in the infinite expansion.
    pub fn example(q: usize, scaling: ExampleScaling) -> Result<Self> {
        if q == 0 {
            return Err(Error::invalid("q", "must be at least 1"));
        }
        let m = example_normalizer();
        let (mean, outer) = match scaling {
            ExampleScaling::Normalized => (MeanField::Bilinear([0.2, 0.0, 0.0, 0.1]), 0.1),
            ExampleScaling::AsPrinted => (MeanField::Bilinear([0.2, 0.0, 0.0, 0.1]), 1.0),
        };
        let mut basis = Vec::with_capacity(q * (q + 1) / 2);
        let mut norms = Vec::with_capacity(q * (q + 1) / 2);
        for l in 1..=q as u32 {
            for k in 1..=(q as u32 + 1 - l) {
                let amplitude = outer / (m * f64::from(k + l).powi(4));
                basis.push(BasisFunction::SineProduct { k, l, amplitude });
                // sin(kπx₁) sin(lπx₂) attains 1 at x = (1/(2k), 1/(2l)).
                norms.push(amplitude);
            }
        }
        // assumptions hold for any p > 1/2
        Self::with_sup_norms(mean, basis, norms, 0.55)
    }

    /// Reorders modes by nonincreasing sup-norm (stable, so ties keep their order).
    pub fn sorted_by_norm(&self) -> Self {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| self.sup_norms[b].partial_cmp(&self.sup_norms[a]).unwrap());
        Self {
            mean: self.mean.clone(),
            basis: order.iter().map(|&i| self.basis[i].clone()).collect(),
            sup_norms: order.iter().map(|&i| self.sup_norms[i]).collect(),
            summability_p: self.summability_p,
            bounds: self.bounds,
            sorted: true,
            labels: order.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    /// Copy restricted to the first `z` modes.
    pub fn truncated(&self, z: usize) -> Result<Self> {
        self.check_dim(z)?;
        let mut f = Self::with_sup_norms(self.mean.clone(), self.basis[..z].to_vec(), self.sup_norms[..z].to_vec(), self.summability_p)?;
        f.sorted = self.sorted;
        f.labels = self.labels[..z].to_vec();
        Ok(f)
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn mean(&self) -> &MeanField {
        &self.mean
    }

    pub fn basis(&self) -> &[BasisFunction] {
        &self.basis
    }

    pub fn sup_norms(&self) -> &[f64] {
        &self.sup_norms
    }

    pub fn summability_p(&self) -> f64 {
        self.summability_p
    }

    pub fn labels(&self) -> &[Option<(u32, u32)>] {
        &self.labels
    }

    /// Declared (κ_min, κ_max).
    pub fn declared_bounds(&self) -> (f64, f64) {
        self.bounds
    }

    pub fn is_sorted(&self) -> bool {
        self.sorted
    }

    /// Lower bound used to scale QMC weights: the declared κ_min when positive,
    /// otherwise the minimum of κ₀.
    pub fn kappa_min_for_weights(&self) -> f64 {
        if self.bounds.0 > 0.0 {
            self.bounds.0
        } else {
            self.mean.range().0
        }
    }

    fn check_dim(&self, z: usize) -> Result<()> {
        if z > self.len() {
            return Err(Error::Config(format!("truncation dimension {z} exceeds the {} available modes", self.len())));
        }
        Ok(())
    }

    pub fn mean_value(&self, x: [f64; 2]) -> f64 {
        self.mean.value(x)
    }

    #[inline]
    pub fn basis_value(&self, j: usize, x: [f64; 2]) -> f64 {
        self.basis[j].value(x)
    }

    /// κ(x, y) with y_j = 0 for j beyond `y.dim()`.
    pub fn evaluate_kappa(&self, x: [f64; 2], y: &ParameterVector) -> Result<f64> {
        if !in_unit_square(x) {
            return Err(Error::OutsideDomain { point: x });
        }
        self.check_dim(y.dim())?;
        Ok(self.kappa_unchecked(x, y.coords()))
    }

    pub(crate) fn kappa_unchecked(&self, x: [f64; 2], y: &[f64]) -> f64 {
        let mut k = self.mean.value(x);
        for (yj, b) in y.iter().zip(&self.basis) {
            if *yj != 0.0 {
                k += yj * b.value(x);
            }
        }
        k
    }

    /// ½ Σ_{j>z} ‖ψ_j‖_∞, a uniform bound on |κ − κ̂| after truncation to z terms.
    pub fn tail_bound(&self, z: usize) -> Result<f64> {
        self.check_dim(z)?;
        Ok(0.5 * self.sup_norms[z..].iter().rev().sum::<f64>())
    }

    /// Samples κ on a tensor grid against worst-case parameter vectors
    /// (y_j = ∓½ sign ψ_j(x)) and `sample_count` uniform random vectors.
    pub fn verify_bounds(&self, grid_resolution: usize, sample_count: usize, rng_seed: u64) -> Result<BoundsReport> {
        if grid_resolution < 2 {
            return Err(Error::invalid("grid_resolution", "must be at least 2"));
        }
        if sample_count < 1 {
            return Err(Error::invalid("sample_count", "must be at least 1"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        let samples: Vec<Vec<f64>> = (0..sample_count)
            .map(|_| (0..self.len()).map(|_| rng.gen_range(-0.5..0.5)).collect())
            .collect();
        let mut report = BoundsReport::new(self.bounds);
        let step = 1.0 / (grid_resolution - 1) as f64;
        let mut psi = vec![0.0; self.len()];
        for j in 0..grid_resolution {
            for i in 0..grid_resolution {
                let x = [i as f64 * step, j as f64 * step];
                let k0 = self.mean.value(x);
                for (p, b) in psi.iter_mut().zip(&self.basis) {
                    *p = b.value(x);
                }
                let spread: f64 = 0.5 * psi.iter().map(|v| v.abs()).sum::<f64>();
                report.record(x, k0 - spread, || psi.iter().map(|v| if *v > 0.0 { -0.5 } else { 0.5 }).collect());
                report.record(x, k0 + spread, || psi.iter().map(|v| if *v > 0.0 { 0.5 } else { -0.5 }).collect());
                for y in &samples {
                    let k = k0 + y.iter().zip(&psi).map(|(a, b)| a * b).sum::<f64>();
                    report.record(x, k, || y.clone());
                }
            }
        }
        Ok(report)
    }
}

/// Outcome of [`RandomField::verify_bounds`].
#[derive(Debug, Clone)]
pub struct BoundsReport {
    pub observed_min: f64,
    pub observed_max: f64,
    pub declared: (f64, f64),
    pub violation_count: usize,
    /// The first few offending (x, y) pairs.
    pub violations: Vec<BoundsViolation>,
}

#[derive(Debug, Clone)]
pub struct BoundsViolation {
    pub x: [f64; 2],
    pub y: Vec<f64>,
    pub kappa: f64,
}

impl BoundsReport {
    const KEEP: usize = 16;

    fn new(declared: (f64, f64)) -> Self {
        Self { observed_min: f64::INFINITY, observed_max: f64::NEG_INFINITY, declared, violation_count: 0, violations: Vec::new() }
    }

    fn record(&mut self, x: [f64; 2], kappa: f64, y: impl FnOnce() -> Vec<f64>) {
        self.observed_min = self.observed_min.min(kappa);
        self.observed_max = self.observed_max.max(kappa);
        let tol = 1e-12 * self.declared.1.abs().max(1.0);
        let bad = kappa <= 0.0 || kappa < self.declared.0 - tol || kappa > self.declared.1 + tol;
        if bad {
            self.violation_count += 1;
            if self.violations.len() < Self::KEEP {
                self.violations.push(BoundsViolation { x, y: y(), kappa });
            }
        }
    }

    pub fn is_ok(&self) -> bool {
        self.violation_count == 0
    }
}

/// Parameter vector y ∈ [−½, ½]^z; entries past z are implicitly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterVector {
    coords: Vec<f64>,
}

impl ParameterVector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if let Some(bad) = coords.iter().find(|c| !(c.abs() <= 0.5)) {
            return Err(Error::invalid("y", format!("coordinate {bad} outside [-1/2, 1/2]")));
        }
        Ok(Self { coords })
    }

    pub fn zeros(z: usize) -> Self {
        Self { coords: vec![0.0; z] }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }
}

/// M = ζ(3) − ζ(4) = Σ_{k,l≥1} (k+l)^{-4}.
pub fn example_normalizer() -> f64 {
    zeta(3.0) - zeta(4.0)
}

fn in_unit_square(x: [f64; 2]) -> bool {
    x.iter().all(|c| (-DOMAIN_SLACK..=1.0 + DOMAIN_SLACK).contains(c))
}

/// max |f| over the unit square: grid scan, then alternating golden-section
/// refinement in each coordinate around the best node.
pub fn sup_norm_by_search(f: impl Fn([f64; 2]) -> f64, resolution: usize) -> f64 {
    let h = 1.0 / resolution as f64;
    let mut best = (0.0, [0.0, 0.0]);
    for j in 0..=resolution {
        for i in 0..=resolution {
            let x = [i as f64 * h, j as f64 * h];
            let v = f(x).abs();
            if v > best.0 {
                best = (v, x);
            }
        }
    }
    let mut x = best.1;
    for _ in 0..4 {
        for axis in 0..2 {
            let lo = (x[axis] - h).max(0.0);
            let hi = (x[axis] + h).min(1.0);
            let arg = golden_max(
                |t| {
                    let mut p = x;
                    p[axis] = t;
                    f(p).abs()
                },
                lo,
                hi,
            );
            let mut p = x;
            p[axis] = arg;
            if f(p).abs() >= f(x).abs() {
                x = p;
            }
        }
    }
    f(x).abs().max(best.0)
}

fn golden_max(g: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    for _ in 0..80 {
        if gc > gd {
            b = d;
            d = c;
            gd = gc;
            c = b - r * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + r * (b - a);
            gd = g(d);
        }
        if (b - a).abs() < 1e-14 {
            break;
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(j: usize, z: usize) -> ParameterVector {
        let mut c = vec![0.0; z];
        c[j] = 0.5;
        ParameterVector::new(c).unwrap()
    }

    #[test]
    fn normalizer_digits() {
        let m = example_normalizer();
        assert!((m - 0.119_733_669_448_456).abs() < 1e-13, "{m}");
    }

    #[test]
    fn example_sizes() {
        assert_eq!(RandomField::example(22, ExampleScaling::Normalized).unwrap().len(), 253);
        assert_eq!(RandomField::example(1, ExampleScaling::Normalized).unwrap().len(), 1);
        assert!(RandomField::example(0, ExampleScaling::Normalized).is_err());
    }

    #[test]
    fn example_ordering_k_fastest() {
        let f = RandomField::example(3, ExampleScaling::Normalized).unwrap();
        let labels: Vec<_> = f.labels().iter().map(|l| l.unwrap()).collect();
        assert_eq!(labels, vec![(1, 1), (2, 1), (3, 1), (1, 2), (2, 2), (1, 3)]);
    }

    #[test]
    fn kappa_at_origin_is_mean() {
        let f = RandomField::example(22, ExampleScaling::Normalized).unwrap();
        let k = f.evaluate_kappa([0.0, 0.0], &ParameterVector::zeros(253)).unwrap();
        assert!((k - 0.2).abs() < 1e-15);
    }

    #[test]
    fn kappa_with_first_mode_as_printed() {
        // e_1 = (1, 0, ...) is outside [-1/2, 1/2], so evaluate through the
        // affine structure: κ(x, e_1) = κ(x, 0) + 2 (κ(x, ½ e_1) − κ(x, 0)).
        let f = RandomField::example(22, ExampleScaling::AsPrinted).unwrap();
        let x = [0.5, 0.5];
        let k0 = f.evaluate_kappa(x, &ParameterVector::zeros(253)).unwrap();
        let khalf = f.evaluate_kappa(x, &e(0, 253)).unwrap();
        let k1 = k0 + 2.0 * (khalf - k0);
        let m = example_normalizer();
        assert!((k0 - 0.225).abs() < 1e-15);
        assert!((k1 - (0.225 + 1.0 / (16.0 * m))).abs() < 1e-14);
        // 1/(16M) = 0.52199...; quoted to four digits as 0.5222
        assert!((k1 - 0.225 - 0.5222).abs() < 5e-4);
    }

    #[test]
    fn kappa_rejects_bad_inputs() {
        let f = RandomField::example(2, ExampleScaling::Normalized).unwrap();
        assert!(matches!(f.evaluate_kappa([1.5, 0.2], &ParameterVector::zeros(3)), Err(Error::OutsideDomain { .. })));
        assert!(matches!(f.evaluate_kappa([0.5, 0.2], &ParameterVector::zeros(4)), Err(Error::Config(_))));
        assert!(ParameterVector::new(vec![0.6]).is_err());
    }

    #[test]
    fn tail_bound_edges() {
        let f = RandomField::example(22, ExampleScaling::AsPrinted).unwrap();
        assert_eq!(f.tail_bound(253).unwrap(), 0.0);
        // direct summation over all 253 terms
        let m = example_normalizer();
        let mut direct = 0.0;
        for l in 1..=22u32 {
            for k in 1..=(23 - l) {
                direct += 1.0 / (m * f64::from(k + l).powi(4));
            }
        }
        assert!((f.tail_bound(0).unwrap() - 0.5 * direct).abs() < 1e-14);
        assert!(f.tail_bound(254).is_err());
    }

    #[test]
    fn tail_bound_differences() {
        let f = RandomField::example(22, ExampleScaling::Normalized).unwrap();
        for z in 0..f.len() {
            let d = f.tail_bound(z).unwrap() - f.tail_bound(z + 1).unwrap();
            assert!((d - 0.5 * f.sup_norms()[z]).abs() <= 4.0 * f64::EPSILON * f.tail_bound(z).unwrap());
            assert!(d >= 0.0);
        }
    }

    #[test]
    fn constant_field_bounds() {
        let f = RandomField::with_sup_norms(MeanField::Bilinear([1.0, 0.0, 0.0, 0.0]), vec![], vec![], 0.5).unwrap();
        let r = f.verify_bounds(5, 3, 7).unwrap();
        assert_eq!((r.observed_min, r.observed_max), (1.0, 1.0));
        assert!(r.is_ok());
    }

    #[test]
    fn violation_is_reported_not_raised() {
        let psi = GriddedFunction::new(1, vec![0.3; 4]).unwrap();
        let f = RandomField::new(MeanField::Bilinear([0.1, 0.0, 0.0, 0.0]), vec![BasisFunction::Gridded(psi)], 0.5, 8).unwrap();
        let r = f.verify_bounds(4, 4, 1).unwrap();
        assert!((r.observed_min + 0.05).abs() < 1e-15);
        assert!(!r.is_ok());
        assert!(r.violations.iter().any(|v| v.kappa < 0.0 && v.y == vec![-0.5]));
    }

    #[test]
    fn normalized_example_is_positive() {
        let f = RandomField::example(10, ExampleScaling::Normalized).unwrap();
        let r = f.verify_bounds(41, 8, 3).unwrap();
        assert!(r.observed_min > 0.0);
        assert!(r.is_ok(), "{:?}", r.violations.first());
        let (lo, hi) = f.declared_bounds();
        assert!(lo >= 0.15 - 1e-15 && hi <= 0.35 + 1e-15);
    }

    #[test]
    fn as_printed_example_goes_negative() {
        let f = RandomField::example(10, ExampleScaling::AsPrinted).unwrap();
        let r = f.verify_bounds(41, 2, 3).unwrap();
        assert!(r.observed_min < 0.0);
        assert!(!r.is_ok());
    }

    #[test]
    fn sup_norm_search_finds_sine_peak() {
        for (k, l) in [(1u32, 1u32), (3, 2), (7, 5), (13, 9)] {
            let b = BasisFunction::SineProduct { k, l, amplitude: 0.25 };
            let s = sup_norm_by_search(|x| b.value(x), 256);
            assert!((s - 0.25).abs() < 1e-10, "k={k} l={l} s={s}");
        }
    }

    #[test]
    fn sorting_makes_norms_nonincreasing() {
        let f = RandomField::example(8, ExampleScaling::Normalized).unwrap();
        assert!(!f.sup_norms().windows(2).all(|w| w[0] >= w[1]));
        let s = f.sorted_by_norm();
        assert!(s.is_sorted());
        assert!(s.sup_norms().windows(2).all(|w| w[0] >= w[1]));
        assert_eq!(s.len(), f.len());
    }
}
