//! Preconditioned conjugate gradients with a Cholesky-factor preconditioner.

use super::cholesky::EnvelopeCholesky;
use super::sparse::{axpy, dot, SparseSymMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct PcgOptions {
    /// Stop when ‖r‖_W ≤ rtol ‖b‖_W (W the norm matrix, or the identity).
    pub rtol: f64,
    pub max_iter: usize,
}

impl Default for PcgOptions {
    fn default() -> Self {
        Self { rtol: 1e-10, max_iter: 500 }
    }
}

/// Solves A x = b starting from the given x; returns the iteration count.
pub fn pcg(
    a: &SparseSymMatrix,
    b: &[f64],
    x: &mut [f64],
    prec: &EnvelopeCholesky,
    norm: Option<&SparseSymMatrix>,
    opts: PcgOptions,
) -> Result<usize> {
    let n = b.len();
    let wnorm = |v: &[f64]| match norm {
        Some(w) => w.quadratic_form(v).max(0.0).sqrt(),
        None => dot(v, v).sqrt(),
    };
    let bn = wnorm(b);
    if bn == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(0);
    }
    let mut r = a.mul_vec(x);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut work = vec![0.0; n];
    let mut zv = vec![0.0; n];
    prec.solve_into(&r, &mut zv, &mut work);
    let mut p = zv.clone();
    let mut rz = dot(&r, &zv);
    let mut ap = vec![0.0; n];
    let mut res = wnorm(&r) / bn;
    for it in 0..=opts.max_iter {
        if res <= opts.rtol {
            return Ok(it);
        }
        if it == opts.max_iter {
            break;
        }
        a.mul_vec_into(&p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        axpy(alpha, &p, x);
        axpy(-alpha, &ap, &mut r);
        prec.solve_into(&r, &mut zv, &mut work);
        let rz_new = dot(&r, &zv);
        let beta = rz_new / rz;
        rz = rz_new;
        for (pi, zi) in p.iter_mut().zip(&zv) {
            *pi = zi + beta * *pi;
        }
        res = wnorm(&r) / bn;
    }
    Err(Error::NoConvergence { iterations: opts.max_iter, residual: res })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{Dofs, FemSpace, TriMesh};
    use std::sync::Arc;

    #[test]
    fn converges_with_nearby_preconditioner() {
        let s = FemSpace::new(Arc::new(TriMesh::unit_square(12).unwrap()), Dofs::Interior).unwrap();
        let a = s.stiffness_with(|x| 1.0 + 0.5 * x[0]).unwrap().linear_combination(1.0, s.mass(), 10.0);
        let p = s.stiffness_with(|_| 1.0).unwrap().linear_combination(1.0, s.mass(), 10.0);
        let chol = EnvelopeCholesky::factor(s.symbolic(), &p).unwrap();
        let b: Vec<f64> = (0..s.n_dofs()).map(|i| (i as f64).cos()).collect();
        let mut x = vec![0.0; s.n_dofs()];
        let it = pcg(&a, &b, &mut x, &chol, Some(s.mass()), PcgOptions::default()).unwrap();
        assert!(it > 0 && it < 40, "{it}");
        let direct = EnvelopeCholesky::factor(s.symbolic(), &a).unwrap().solve(&b);
        let err = x.iter().zip(&direct).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
        let scale = direct.iter().map(|v| v.abs()).fold(0.0, f64::max);
        assert!(err < 1e-8 * scale);
    }

    #[test]
    fn reports_nonconvergence() {
        let s = FemSpace::new(Arc::new(TriMesh::unit_square(10).unwrap()), Dofs::Interior).unwrap();
        let a = s.stiffness_with(|x| 1.0 + 50.0 * x[0]).unwrap();
        let p = s.mass().clone();
        let chol = EnvelopeCholesky::factor(s.symbolic(), &p).unwrap();
        let b = vec![1.0; s.n_dofs()];
        let mut x = vec![0.0; s.n_dofs()];
        let e = pcg(&a, &b, &mut x, &chol, None, PcgOptions { rtol: 1e-14, max_iter: 2 }).unwrap_err();
        assert!(matches!(e, Error::NoConvergence { iterations: 2, .. }));
    }
}
