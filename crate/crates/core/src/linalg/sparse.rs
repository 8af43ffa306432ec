use alloc::vec;
use alloc::vec::Vec;

use super::Mat;

/// Compressed sparse rows over `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Csr {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

/// Compressed sparse rows over `i64`; used for incidence matrices and chain maps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseInt {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<i64>,
}

macro_rules! csr_common {
    ($ty:ident, $scalar:ty, $zero:expr) => {
        impl $ty {
            /// Builds from `(row, col, value)` triplets; duplicates are summed
            /// and explicit zeros dropped.
            pub fn from_triplets(rows: usize, cols: usize, mut t: Vec<(usize, usize, $scalar)>) -> Self {
                t.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
                let mut indptr = vec![0usize; rows + 1];
                let mut indices = Vec::with_capacity(t.len());
                let mut values: Vec<$scalar> = Vec::with_capacity(t.len());
                let mut last: Option<(usize, usize)> = None;
                for (r, c, v) in t {
                    assert!(r < rows && c < cols, "triplet out of bounds");
                    if last == Some((r, c)) {
                        *values.last_mut().unwrap() += v;
                    } else {
                        indices.push(c);
                        values.push(v);
                        indptr[r + 1] += 1;
                        last = Some((r, c));
                    }
                }
                for r in 0..rows {
                    indptr[r + 1] += indptr[r];
                }
                let mut out = Self { rows, cols, indptr, indices, values };
                out.prune();
                out
            }

            pub fn zeros(rows: usize, cols: usize) -> Self {
                Self { rows, cols, indptr: vec![0; rows + 1], indices: Vec::new(), values: Vec::new() }
            }

            fn prune(&mut self) {
                let mut indptr = vec![0usize; self.rows + 1];
                let mut indices = Vec::with_capacity(self.indices.len());
                let mut values = Vec::with_capacity(self.values.len());
                for r in 0..self.rows {
                    for k in self.indptr[r]..self.indptr[r + 1] {
                        if self.values[k] != $zero {
                            indices.push(self.indices[k]);
                            values.push(self.values[k]);
                        }
                    }
                    indptr[r + 1] = indices.len();
                }
                self.indptr = indptr;
                self.indices = indices;
                self.values = values;
            }

            pub fn rows(&self) -> usize {
                self.rows
            }

            pub fn cols(&self) -> usize {
                self.cols
            }

            pub fn nnz(&self) -> usize {
                self.values.len()
            }

            pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, $scalar)> + '_ {
                (self.indptr[r]..self.indptr[r + 1]).map(move |k| (self.indices[k], self.values[k]))
            }

            pub fn get(&self, r: usize, c: usize) -> $scalar {
                let s = &self.indices[self.indptr[r]..self.indptr[r + 1]];
                match s.binary_search(&c) {
                    Ok(k) => self.values[self.indptr[r] + k],
                    Err(_) => $zero,
                }
            }

            pub fn triplets(&self) -> Vec<(usize, usize, $scalar)> {
                let mut t = Vec::with_capacity(self.nnz());
                for r in 0..self.rows {
                    for (c, v) in self.row(r) {
                        t.push((r, c, v));
                    }
                }
                t
            }

            pub fn transpose(&self) -> Self {
                let t = self.triplets().into_iter().map(|(r, c, v)| (c, r, v)).collect();
                Self::from_triplets(self.cols, self.rows, t)
            }

            pub fn mul_vec(&self, x: &[$scalar]) -> Vec<$scalar> {
                assert_eq!(x.len(), self.cols);
                (0..self.rows)
                    .map(|r| {
                        let mut acc = $zero;
                        for (c, v) in self.row(r) {
                            acc += v * x[c];
                        }
                        acc
                    })
                    .collect()
            }

            /// `xᵀ A`, i.e. `Aᵀ x`.
            pub fn tmul_vec(&self, x: &[$scalar]) -> Vec<$scalar> {
                assert_eq!(x.len(), self.rows);
                let mut out = vec![$zero; self.cols];
                for r in 0..self.rows {
                    if x[r] == $zero {
                        continue;
                    }
                    for (c, v) in self.row(r) {
                        out[c] += v * x[r];
                    }
                }
                out
            }

            /// Sparse product `self · other`.
            pub fn matmul(&self, other: &Self) -> Self {
                assert_eq!(self.cols, other.rows);
                let mut t = Vec::new();
                let mut acc = vec![$zero; other.cols];
                let mut touched: Vec<usize> = Vec::new();
                let mut mark = vec![false; other.cols];
                for r in 0..self.rows {
                    for (k, a) in self.row(r) {
                        for (c, b) in other.row(k) {
                            if !mark[c] {
                                mark[c] = true;
                                touched.push(c);
                            }
                            acc[c] += a * b;
                        }
                    }
                    touched.sort_unstable();
                    for &c in &touched {
                        t.push((r, c, acc[c]));
                        acc[c] = $zero;
                        mark[c] = false;
                    }
                    touched.clear();
                }
                Self::from_triplets(self.rows, other.cols, t)
            }
        }
    };
}

csr_common!(Csr, f64, 0.0);
csr_common!(SparseInt, i64, 0);

impl Csr {
    pub fn to_dense(&self) -> Mat {
        let mut m = Mat::zeros(self.rows, self.cols);
        for r in 0..self.rows {
            for (c, v) in self.row(r) {
                m[(r, c)] = v;
            }
        }
        m
    }

    pub fn from_dense(m: &Mat) -> Self {
        let mut t = Vec::new();
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                if m[(r, c)] != 0.0 {
                    t.push((r, c, m[(r, c)]));
                }
            }
        }
        Self::from_triplets(m.nrows(), m.ncols(), t)
    }

    /// `self · d` for a dense right factor.
    pub fn mul_dense(&self, d: &Mat) -> Mat {
        assert_eq!(self.cols, d.nrows());
        let mut out = Mat::zeros(self.rows, d.ncols());
        for r in 0..self.rows {
            for (k, v) in self.row(r) {
                for j in 0..d.ncols() {
                    out[(r, j)] += v * d[(k, j)];
                }
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        for v in &mut out.values {
            *v *= s;
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut t = self.triplets();
        t.extend(other.triplets().into_iter().map(|(r, c, v)| (r, c, -v)));
        Self::from_triplets(self.rows, self.cols, t)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |a, &v| a.max(v.abs()))
    }
}

impl SparseInt {
    pub fn to_f64(&self) -> Csr {
        Csr::from_triplets(self.rows, self.cols, self.triplets().into_iter().map(|(r, c, v)| (r, c, v as f64)).collect())
    }

    pub fn mul_vec_f64(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|r| self.row(r).map(|(c, v)| v as f64 * x[c]).sum()).collect()
    }

    pub fn tmul_vec_f64(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for r in 0..self.rows {
            for (c, v) in self.row(r) {
                out[c] += v as f64 * x[r];
            }
        }
        out
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, n, (0..n).map(|i| (i, i, 1)).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }
}
