//! Fast component-by-component construction of interlaced polynomial lattice
//! rules with SPOD weights.
//!
//! The figure of merit of a (possibly partial) generating vector g_1..g_L is
//!
//! E = Σ_{∅≠u⊆{1:s}} γ_u (1/N) Σ_n Π_{j∈u} Y_j(n),
//! Y_j(n) = Π_i (1 + ω(x_{n,(j−1)β+i})) − 1,
//!
//! where the inner product runs over the components of block j chosen so far
//! and γ_u = Σ_{ν∈{1:β}^{|u|}} |ν|! Π_{j∈u} 2^{δ(ν_j,β)} b_j^{ν_j}.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::gf::{prime_factors, GFPoly};
use super::points::{InterlacedLatticeRule, LaurentDigits, VectorSource};
use crate::error::{Error, Result};
use crate::field::RandomField;

/// Per-dimension decay sequence b_j of the SPOD weights.
#[derive(Debug, Clone, PartialEq)]
pub struct SpodWeights {
    decay: Vec<f64>,
}

impl SpodWeights {
    pub fn new(decay: Vec<f64>) -> Result<Self> {
        if decay.iter().any(|b| !(b.is_finite() && *b >= 0.0)) {
            return Err(Error::invalid("weights", "decay entries must be finite and nonnegative"));
        }
        Ok(Self { decay })
    }

    /// b_j = √2 ‖ψ_j‖_∞ / κ_min.
    pub fn from_field(field: &RandomField) -> Self {
        let kmin = field.kappa_min_for_weights();
        Self { decay: field.sup_norms().iter().map(|s| std::f64::consts::SQRT_2 * s / kmin).collect() }
    }

    pub fn decay(&self) -> &[f64] {
        &self.decay
    }

    /// c_{j,ν} = 2^{δ(ν,β)} b_j^ν for ν = 1..β (index 0 unused).
    fn coefficients(&self, j: usize, beta: usize) -> Vec<f64> {
        let b = self.decay[j];
        (0..=beta).map(|nu| if nu == 0 { 0.0 } else { b.powi(nu as i32) * if nu == beta { 2.0 } else { 1.0 } }).collect()
    }
}

/// Walsh kernel exponent; β = 1 uses the classical value 2.
fn kernel_order(beta: usize) -> usize {
    beta.max(2)
}

/// ω(x) for x = mantissa / b^m.
pub fn walsh_kernel(b: u32, m: usize, lambda: usize, mantissa: u64) -> f64 {
    let bf = b as f64;
    let bl = bf.powi(lambda as i32);
    let w0 = (bf - 1.0) / (bl - bf);
    if mantissa == 0 {
        return w0;
    }
    // ⌊log_b x⌋ = (number of base-b digits of the mantissa) − 1 − m
    let mut nd = 0i32;
    let mut v = mantissa;
    while v > 0 {
        v /= b as u64;
        nd += 1;
    }
    let e = nd - 1 - m as i32;
    w0 - bf.powi((lambda as i32 - 1) * e) * (bl - 1.0) / (bl - bf)
}

/// Running state of the W(ℓ, n) recursion over completed blocks plus the
/// partial product of the current block.
struct MeritState {
    n: usize,
    beta: usize,
    lmax: usize,
    /// w[ℓ * n + idx]
    w: Vec<f64>,
    partial: Vec<f64>,
    blocks_done: usize,
}

impl MeritState {
    fn new(n: usize, beta: usize, z: usize) -> Self {
        let lmax = beta * z;
        let mut w = vec![0.0; (lmax + 1) * n];
        w[..n].iter_mut().for_each(|v| *v = 1.0);
        Self { n, beta, lmax, w, partial: vec![1.0; n], blocks_done: 0 }
    }

    fn top(&self) -> usize {
        (self.beta * self.blocks_done).min(self.lmax)
    }

    /// A(n) = Σ_ν c_ν Σ_ℓ (ℓ+ν)!/ℓ! W(ℓ, n).
    fn a_factor(&self, c: &[f64]) -> Vec<f64> {
        let mut a = vec![0.0; self.n];
        for l in 0..=self.top() {
            let row = &self.w[l * self.n..(l + 1) * self.n];
            let mut coef = 0.0;
            for (nu, cn) in c.iter().enumerate().skip(1) {
                if l + nu <= self.lmax {
                    coef += cn * falling(l + nu, nu);
                }
            }
            if coef != 0.0 {
                for (ai, wi) in a.iter_mut().zip(row) {
                    *ai += coef * wi;
                }
            }
        }
        a
    }

    /// Folds Y(n) = partial(n) − 1 into W and starts a new block.
    fn close_block(&mut self, c: &[f64]) {
        let n = self.n;
        let top = (self.top() + self.beta).min(self.lmax);
        let y: Vec<f64> = self.partial.iter().map(|p| p - 1.0).collect();
        for l in (1..=top).rev() {
            for nu in 1..=self.beta.min(l) {
                let f = c[nu] * falling(l, nu);
                if f == 0.0 {
                    continue;
                }
                let (lo, hi) = self.w.split_at_mut(l * n);
                let src = &lo[(l - nu) * n..(l - nu + 1) * n];
                for ((dst, s), yi) in hi[..n].iter_mut().zip(src).zip(&y) {
                    *dst += f * yi * s;
                }
            }
        }
        self.partial.iter_mut().for_each(|p| *p = 1.0);
        self.blocks_done += 1;
    }

    /// (1/N) Σ_n Σ_{ℓ≥1} W(ℓ, n), including the open block if any.
    fn value(&self, c_open: Option<&[f64]>) -> f64 {
        let n = self.n;
        let mut s = 0.0;
        for l in 1..=self.lmax {
            s += crate::numeric::pairwise_sum(&self.w[l * n..(l + 1) * n]);
        }
        if let Some(c) = c_open {
            let a = self.a_factor(c);
            let terms: Vec<f64> = self.partial.iter().zip(&a).map(|(p, ai)| (p - 1.0) * ai).collect();
            s += crate::numeric::pairwise_sum(&terms);
        }
        s / n as f64
    }
}

/// ℓ!/(ℓ−ν)!
fn falling(l: usize, nu: usize) -> f64 {
    ((l + 1 - nu)..=l).fold(1.0, |acc, k| acc * k as f64)
}

/// Figure of merit of the rule generated by `gen` (length L ≤ βz, the last
/// block may be incomplete), evaluated by the W(ℓ, n) recursion.
pub fn figure_of_merit(b: u32, m: usize, beta: usize, modulus: &GFPoly, gen: &[GFPoly], weights: &SpodWeights) -> Result<f64> {
    if beta == 0 {
        return Err(Error::invalid("beta", "must be at least 1"));
    }
    let z = gen.len().div_ceil(beta);
    if weights.decay.len() < z {
        return Err(Error::Config(format!("{} weights supplied for {z} dimensions", weights.decay.len())));
    }
    if gen.is_empty() {
        return Ok(0.0);
    }
    let pts = super::points::classical_points(b, m, modulus, gen)?;
    let lambda = kernel_order(beta);
    let n = pts.n_points();
    let mut st = MeritState::new(n, beta, z);
    for (k, _) in gen.iter().enumerate() {
        for i in 0..n {
            st.partial[i] *= 1.0 + walsh_kernel(b, m, lambda, pts.mantissa(i, k));
        }
        if (k + 1) % beta == 0 {
            st.close_block(&weights.coefficients(k / beta, beta));
        }
    }
    let open = if gen.len() % beta != 0 { Some(weights.coefficients(z - 1, beta)) } else { None };
    Ok(st.value(open.as_deref()))
}

/// Smallest (by index) generator of the multiplicative group of GF(b)[x]/P.
fn primitive_element(modulus: &GFPoly, order: u64) -> GFPoly {
    let b = modulus.base();
    let factors = prime_factors(order);
    (1..=order)
        .map(|i| GFPoly::from_index(b, i))
        .find(|g| factors.iter().all(|r| g.pow_mod(order / r, modulus).index() != 1))
        .expect("the multiplicative group of a finite field is cyclic")
}

/// Output of [`cbc_construct`].
#[derive(Debug, Clone)]
pub struct CbcResult {
    pub gen_vector: Vec<GFPoly>,
    /// Figure of merit after each appended component.
    pub merit: Vec<f64>,
}

/// Greedy component-by-component choice of β z generators minimizing the
/// figure of merit. Each component is scored over all b^m − 1 candidates at
/// once as a circular correlation over the multiplicative group, using FFTs
/// of length b^m − 1. Ties (relative 1e-12) go to the smallest polynomial.
pub fn cbc_construct(b: u32, m: usize, beta: usize, z: usize, modulus: &GFPoly, weights: &SpodWeights) -> Result<CbcResult> {
    if beta == 0 || z == 0 || m == 0 {
        return Err(Error::invalid("cbc", "b, m, beta and z must be positive"));
    }
    if modulus.base() != b || modulus.degree() != Some(m) {
        return Err(Error::DegreeMismatch(format!("modulus {modulus} is not of degree {m} over GF({b})")));
    }
    if !modulus.is_irreducible() {
        return Err(Error::ReducibleModulus { base: b });
    }
    if weights.decay.len() < z {
        return Err(Error::Config(format!("{} weights supplied for {z} dimensions", weights.decay.len())));
    }
    let n = (b as u64).pow(m as u32) as usize;
    let len = n - 1;
    let lambda = kernel_order(beta);

    // power and log tables of a primitive element ζ
    let zeta = primitive_element(modulus, len as u64);
    let mut pow_idx = Vec::with_capacity(len);
    let mut log = vec![0usize; n];
    let mut cur = GFPoly::one(b);
    for k in 0..len {
        let idx = cur.index() as usize;
        pow_idx.push(idx);
        log[idx] = k;
        cur = cur.mul_mod(&zeta, modulus);
    }
    let v = LaurentDigits::new(modulus, &GFPoly::one(b));
    let mant: Vec<u64> = pow_idx.iter().map(|i| v.apply(*i as u64)).collect();
    let omega_tab: Vec<f64> = mant.iter().map(|u| walsh_kernel(b, m, lambda, *u)).collect();

    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(len);
    let inv = planner.plan_fft_inverse(len);
    let mut omega_hat: Vec<Complex<f64>> = omega_tab.iter().map(|v| Complex::new(*v, 0.0)).collect();
    fwd.process(&mut omega_hat);

    let mut st = MeritState::new(n, beta, z);
    let mut gen = Vec::with_capacity(beta * z);
    let mut merit = Vec::with_capacity(beta * z);
    for j in 0..z {
        let c = weights.coefficients(j, beta);
        let a = st.a_factor(&c);
        for _ in 0..beta {
            // score(c) = Σ_a w[a] ω_tab[(a + c) mod L] with w[a] = partial·A at n = ζ^a
            let w: Vec<f64> = (0..len).map(|k| st.partial[pow_idx[k]] * a[pow_idx[k]]).collect();
            let mut buf: Vec<Complex<f64>> = w.iter().map(|v| Complex::new(*v, 0.0)).collect();
            fwd.process(&mut buf);
            for (x, o) in buf.iter_mut().zip(&omega_hat) {
                *x = x.conj() * o;
            }
            inv.process(&mut buf);
            let scores: Vec<f64> = buf.iter().map(|x| x.re / len as f64).collect();
            let scale = w.iter().map(|v| v.abs()).sum::<f64>() * omega_tab.iter().fold(0.0f64, |s, v| s.max(v.abs()));
            let best = scores.iter().cloned().fold(f64::INFINITY, f64::min);
            let tol = 1e-12 * scale.max(best.abs());
            let choice = (0..len).filter(|c| scores[*c] <= best + tol).min_by_key(|c| pow_idx[*c]).unwrap();

            // advance the partial products with the chosen component
            st.partial[0] *= 1.0 + walsh_kernel(b, m, lambda, 0);
            for i in 1..n {
                st.partial[i] *= 1.0 + omega_tab[(log[i] + choice) % len];
            }
            gen.push(GFPoly::from_index(b, pow_idx[choice] as u64));
            if gen.len() % beta == 0 {
                st.close_block(&c);
                merit.push(st.value(None));
            } else {
                merit.push(st.value(Some(&c)));
            }
        }
    }
    Ok(CbcResult { gen_vector: gen, merit })
}

impl InterlacedLatticeRule {
    /// CBC-built rule with the default modulus for (b, m).
    pub fn cbc(b: u32, m: usize, beta: usize, z: usize, weights: &SpodWeights) -> Result<Self> {
        let modulus = super::gf::default_modulus(b, m)?;
        let res = cbc_construct(b, m, beta, z, &modulus, weights)?;
        Self::new(b, m, beta, z, modulus, res.gen_vector, VectorSource::Cbc)
    }
}
