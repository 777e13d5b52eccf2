//! Reverse Cuthill–McKee ordering and envelope (profile) Cholesky factorization.

use std::collections::VecDeque;
use std::sync::Arc;

use super::sparse::{Pattern, SparseSymMatrix};
use crate::error::{Error, Result};

/// Reverse Cuthill–McKee permutation (new index → old index).
pub fn reverse_cuthill_mckee(p: &Pattern) -> Vec<usize> {
    let n = p.n();
    let degree: Vec<usize> = (0..n).map(|i| p.row(i).iter().filter(|&&j| j != i).count()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);

    let bfs_levels = |start: usize, mark: &mut Vec<usize>, stamp: usize| -> (usize, Vec<usize>) {
        // returns (eccentricity, last level)
        let mut level = vec![start];
        mark[start] = stamp;
        let mut depth = 0;
        loop {
            let mut next = Vec::new();
            for &v in &level {
                for &w in p.row(v) {
                    if mark[w] != stamp {
                        mark[w] = stamp;
                        next.push(w);
                    }
                }
            }
            if next.is_empty() {
                return (depth, level);
            }
            depth += 1;
            level = next;
        }
    };

    let mut mark = vec![usize::MAX; n];
    let mut stamp = 0;
    while let Some(seed) = (0..n).filter(|&i| !visited[i]).min_by_key(|&i| (degree[i], i)) {
        // pseudo-peripheral start node
        let mut start = seed;
        let (mut ecc, mut last) = bfs_levels(start, &mut mark, stamp);
        stamp += 1;
        loop {
            let cand = *last.iter().min_by_key(|&&v| (degree[v], v)).unwrap();
            let (e, l) = bfs_levels(cand, &mut mark, stamp);
            stamp += 1;
            if e > ecc {
                start = cand;
                ecc = e;
                last = l;
            } else {
                break;
            }
        }
        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nb: Vec<usize> = p.row(v).iter().copied().filter(|&w| !visited[w]).collect();
            nb.sort_by_key(|&w| (degree[w], w));
            for w in nb {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

/// Envelope structure for a fixed pattern and ordering, reusable across
/// numeric factorizations.
#[derive(Debug)]
pub struct EnvelopeSymbolic {
    pattern: Arc<Pattern>,
    perm: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    /// For each pattern slot in the lower triangle (after permutation), its envelope position.
    scatter: Vec<usize>,
}

impl EnvelopeSymbolic {
    pub fn new(pattern: Arc<Pattern>) -> Self {
        let perm = reverse_cuthill_mckee(&pattern);
        Self::with_ordering(pattern, perm)
    }

    /// `perm` maps new index → old index.
    pub fn with_ordering(pattern: Arc<Pattern>, perm: Vec<usize>) -> Self {
        let n = pattern.n();
        let mut inv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for old in 0..n {
            let i = inv[old];
            for &c in pattern.row(old) {
                let j = inv[c];
                if j < first[i] {
                    first[i] = j;
                }
            }
        }
        let mut start = Vec::with_capacity(n + 1);
        start.push(0);
        for i in 0..n {
            start.push(start[i] + i - first[i] + 1);
        }
        let mut scatter = vec![usize::MAX; pattern.nnz()];
        for old in 0..n {
            let i = inv[old];
            for k in pattern.row_range(old) {
                let j = inv[pattern.row(old)[k - pattern.row_range(old).start]];
                if j <= i {
                    scatter[k] = start[i] + j - first[i];
                }
            }
        }
        Self { pattern, perm, first, start, scatter }
    }

    pub fn n(&self) -> usize {
        self.perm.len()
    }

    /// Number of stored entries of L.
    pub fn envelope_size(&self) -> usize {
        *self.start.last().unwrap()
    }

    pub fn pattern(&self) -> &Arc<Pattern> {
        &self.pattern
    }
}

/// A = L Lᵀ in the permuted ordering.
#[derive(Debug, Clone)]
pub struct EnvelopeCholesky {
    sym: Arc<EnvelopeSymbolic>,
    l: Vec<f64>,
}

impl EnvelopeCholesky {
    pub fn factor(sym: &Arc<EnvelopeSymbolic>, a: &SparseSymMatrix) -> Result<Self> {
        let mut f = Self { sym: sym.clone(), l: vec![0.0; sym.envelope_size()] };
        f.refactor(a)?;
        Ok(f)
    }

    /// Numeric factorization reusing this object's storage.
    pub fn refactor(&mut self, a: &SparseSymMatrix) -> Result<()> {
        let sym = &*self.sym;
        assert_eq!(a.pattern().nnz(), sym.pattern.nnz(), "matrix pattern differs from the symbolic pattern");
        let l = &mut self.l;
        l.iter_mut().for_each(|v| *v = 0.0);
        for (k, &pos) in sym.scatter.iter().enumerate() {
            if pos != usize::MAX {
                l[pos] = a.values()[k];
            }
        }
        for i in 0..sym.n() {
            let fi = sym.first[i];
            let si = sym.start[i];
            for j in fi..i {
                let fj = sym.first[j];
                let sj = sym.start[j];
                let k0 = fi.max(fj);
                let mut s = l[si + j - fi];
                let (ri, rj) = (si + k0 - fi, sj + k0 - fj);
                for t in 0..(j - k0) {
                    s -= l[ri + t] * l[rj + t];
                }
                l[si + j - fi] = s / l[sj + j - fj];
            }
            let row = &l[si..si + i - fi];
            let d = l[si + i - fi] - row.iter().map(|v| v * v).sum::<f64>();
            if !(d > 0.0) {
                return Err(Error::NotPositiveDefinite { pivot: sym.perm[i], value: d });
            }
            l[si + i - fi] = d.sqrt();
        }
        Ok(())
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; b.len()];
        let mut work = vec![0.0; b.len()];
        self.solve_into(b, &mut x, &mut work);
        x
    }

    /// x = A⁻¹ b; `work` has length n.
    pub fn solve_into(&self, b: &[f64], x: &mut [f64], work: &mut [f64]) {
        let sym = &*self.sym;
        let n = sym.n();
        let l = &self.l;
        let y = work;
        for i in 0..n {
            y[i] = b[sym.perm[i]];
        }
        for i in 0..n {
            let fi = sym.first[i];
            let si = sym.start[i];
            let mut s = y[i];
            for (t, v) in l[si..si + i - fi].iter().enumerate() {
                s -= v * y[fi + t];
            }
            y[i] = s / l[si + i - fi];
        }
        for i in (0..n).rev() {
            let fi = sym.first[i];
            let si = sym.start[i];
            let xi = y[i] / l[si + i - fi];
            y[i] = xi;
            for (t, v) in l[si..si + i - fi].iter().enumerate() {
                y[fi + t] -= v * xi;
            }
        }
        for i in 0..n {
            x[sym.perm[i]] = y[i];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(n: usize) -> SparseSymMatrix {
        let p = Arc::new(Pattern::from_pairs(n, (0..n).flat_map(|i| [(i, i), (i, (i + 1).min(n - 1))])));
        let mut a = SparseSymMatrix::zeros(p.clone());
        for i in 0..n {
            for k in p.row_range(i) {
                let j = p.row(i)[k - p.row_range(i).start];
                a.values_mut()[k] = if i == j { 2.0 } else { -1.0 };
            }
        }
        a
    }

    #[test]
    fn rcm_is_a_permutation() {
        let a = laplacian_1d(17);
        let mut p = reverse_cuthill_mckee(a.pattern());
        p.sort();
        assert_eq!(p, (0..17).collect::<Vec<_>>());
    }

    #[test]
    fn solves_tridiagonal() {
        let a = laplacian_1d(30);
        let sym = Arc::new(EnvelopeSymbolic::new(a.pattern().clone()));
        assert!(sym.envelope_size() <= 2 * 30);
        let f = EnvelopeCholesky::factor(&sym, &a).unwrap();
        let x_true: Vec<f64> = (0..30).map(|i| (i as f64 * 0.3).sin()).collect();
        let b = a.mul_vec(&x_true);
        let x = f.solve(&b);
        for (u, v) in x.iter().zip(&x_true) {
            assert!((u - v).abs() < 1e-11);
        }
    }

    #[test]
    fn identity_ordering_agrees() {
        let a = laplacian_1d(12);
        let sym = Arc::new(EnvelopeSymbolic::with_ordering(a.pattern().clone(), (0..12).collect()));
        let f = EnvelopeCholesky::factor(&sym, &a).unwrap();
        let b = vec![1.0; 12];
        let x = f.solve(&b);
        let r = a.mul_vec(&x);
        assert!(r.iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn indefinite_is_reported() {
        let mut a = laplacian_1d(5);
        for v in a.values_mut() {
            *v = -*v;
        }
        let sym = Arc::new(EnvelopeSymbolic::new(a.pattern().clone()));
        assert!(matches!(EnvelopeCholesky::factor(&sym, &a), Err(Error::NotPositiveDefinite { .. })));
    }
}
