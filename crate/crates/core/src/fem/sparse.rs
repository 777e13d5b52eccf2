//! Symmetric sparse matrices in CSR form (both triangles stored).

use std::sync::Arc;

/// Sparsity pattern with sorted column indices per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Pattern {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
}

impl Pattern {
    /// Pattern from (row, col) pairs; duplicates are merged and the result symmetrized.
    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, j) in pairs {
            rows[i].push(j);
            rows[j].push(i);
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for mut r in rows {
            r.sort_unstable();
            r.dedup();
            col_idx.extend(r);
            row_ptr.push(col_idx.len());
        }
        Self { n, row_ptr, col_idx }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn row(&self, i: usize) -> &[usize] {
        &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]]
    }

    pub fn row_range(&self, i: usize) -> std::ops::Range<usize> {
        self.row_ptr[i]..self.row_ptr[i + 1]
    }

    /// Storage slot of entry (i, j), if present.
    pub fn slot(&self, i: usize, j: usize) -> Option<usize> {
        self.row(i).binary_search(&j).ok().map(|k| self.row_ptr[i] + k)
    }
}

/// Symmetric matrix on a shared pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymMatrix {
    pattern: Arc<Pattern>,
    values: Vec<f64>,
}

impl SparseSymMatrix {
    pub fn zeros(pattern: Arc<Pattern>) -> Self {
        let values = vec![0.0; pattern.nnz()];
        Self { pattern, values }
    }

    pub fn pattern(&self) -> &Arc<Pattern> {
        &self.pattern
    }

    pub fn dim(&self) -> usize {
        self.pattern.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.pattern.slot(i, j).map_or(0.0, |k| self.values[k])
    }

    /// y = A x
    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in self.pattern.row_range(i) {
                s += self.values[k] * x[self.pattern.col_idx[k]];
            }
            *yi = s;
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// a·self + b·other on the same pattern.
    pub fn linear_combination(&self, a: f64, other: &Self, b: f64) -> Self {
        assert!(Arc::ptr_eq(&self.pattern, &other.pattern) || self.pattern == other.pattern);
        let values = self.values.iter().zip(&other.values).map(|(x, y)| a * x + b * y).collect();
        Self { pattern: self.pattern.clone(), values }
    }

    /// Overwrites self with a·p + b·q (all on the same pattern).
    pub fn set_linear_combination(&mut self, a: f64, p: &Self, b: f64, q: &Self) {
        for ((v, x), y) in self.values.iter_mut().zip(&p.values).zip(&q.values) {
            *v = a * x + b * y;
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut d = vec![vec![0.0; n]; n];
        for (i, row) in d.iter_mut().enumerate() {
            for k in self.pattern.row_range(i) {
                row[self.pattern.col_idx[k]] = self.values[k];
            }
        }
        d
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.dim()).all(|i| self.pattern.row(i).iter().all(|&j| self.get(i, j) == self.get(j, i)))
    }

    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        dot(x, &self.mul_vec(x))
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pattern_is_symmetric_and_sorted() {
        let p = Pattern::from_pairs(4, [(0, 2), (1, 1), (3, 0), (2, 0)]);
        assert_eq!(p.row(0), &[2, 3]);
        assert_eq!(p.row(2), &[0]);
        assert_eq!(p.row(3), &[0]);
        assert_eq!(p.slot(1, 1), Some(2));
        assert_eq!(p.slot(1, 0), None);
    }

    #[test]
    fn matvec_matches_dense() {
        let p = Arc::new(Pattern::from_pairs(3, [(0, 0), (0, 1), (1, 1), (1, 2), (2, 2)]));
        let mut a = SparseSymMatrix::zeros(p);
        let vals = [2.0, -1.0, -1.0, 2.0, -1.0, -1.0, 2.0];
        a.values_mut().copy_from_slice(&vals);
        assert!(a.is_symmetric());
        assert_eq!(a.mul_vec(&[1.0, 1.0, 1.0]), vec![1.0, 0.0, 1.0]);
        let d = a.to_dense();
        assert_eq!(d[1], vec![-1.0, 2.0, -1.0]);
    }
}
