//! Linear algebra shared by the numeric modules.
//!
//! Dense work goes through `nalgebra`; this module adds the pieces it does not
//! ship: compressed sparse rows over `f64` and `i64`, the symmetric-definite
//! generalized eigenproblem, minimum-norm least squares with an explicit
//! cutoff, and exact rank of sparse integer matrices modulo a large prime.

mod modp;
mod sparse;

pub use modp::{independent_rows, rank_mod_p, MODULUS};
pub use sparse::{Csr, SparseInt};

use alloc::vec::Vec;
use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
#[allow(unused_imports)]
use num_traits::Float;

use crate::{Error, Result};

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    let mut s = CompensatedSum::new();
    for x in it {
        s.add(x);
    }
    s.value()
}

/// Largest absolute entry.
pub fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0, |a, &x| a.max(x.abs()))
}

pub fn max_abs_slice(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, &x| a.max(x.abs()))
}

/// `(m + mᵀ)/2`, in place.
pub fn symmetrize(m: &mut Mat) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let a = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = a;
            m[(j, i)] = a;
        }
    }
}

/// Eigen-decomposition of the pencil `(a, m)` with `a` symmetric and `m`
/// symmetric positive definite.
#[derive(Debug, Clone)]
pub struct GenEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Columns are `m`-orthonormal: `Xᵀ m X = I`.
    pub vectors: Mat,
}

fn whiten(a: &Mat, m: &Mat) -> Result<(Cholesky<f64, Dyn>, Mat)> {
    if a.nrows() != m.nrows() || a.ncols() != m.ncols() || a.nrows() != a.ncols() {
        return Err(Error::Shape(alloc::format!("pencil {}x{} vs {}x{}", a.nrows(), a.ncols(), m.nrows(), m.ncols())));
    }
    let chol = Cholesky::new(m.clone()).ok_or(Error::NotPositiveDefinite)?;
    let l = chol.l();
    let x = l.solve_lower_triangular(a).ok_or(Error::NotPositiveDefinite)?;
    let mut c = l.solve_lower_triangular(&x.transpose()).ok_or(Error::NotPositiveDefinite)?;
    symmetrize(&mut c);
    Ok((chol, c))
}

pub fn gen_eigh(a: &Mat, m: &Mat) -> Result<GenEigen> {
    let n = a.nrows();
    if n == 0 {
        return Ok(GenEigen { values: Vec::new(), vectors: Mat::zeros(0, 0) });
    }
    let (chol, c) = whiten(a, m)?;
    let eig = c.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut y = Mat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        y.set_column(dst, &eig.eigenvectors.column(src));
    }
    let vectors = chol.l().transpose().solve_upper_triangular(&y).ok_or(Error::NotPositiveDefinite)?;
    Ok(GenEigen { values, vectors })
}

/// Eigenvalues only, ascending.
pub fn gen_eigvals(a: &Mat, m: &Mat) -> Result<Vec<f64>> {
    if a.nrows() == 0 {
        return Ok(Vec::new());
    }
    let (_, c) = whiten(a, m)?;
    let mut v: Vec<f64> = c.symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// `log det` of a symmetric positive-definite matrix via Cholesky.
pub fn logdet_spd(m: &Mat) -> Result<f64> {
    if m.nrows() == 0 {
        return Ok(0.0);
    }
    let chol = Cholesky::new(m.clone()).ok_or(Error::NotPositiveDefinite)?;
    let l = chol.l();
    Ok(compensated_sum((0..m.nrows()).map(|i| 2.0 * l[(i, i)].ln())))
}

pub fn cholesky_solve(m: &Mat, b: &Mat) -> Result<Mat> {
    let chol = Cholesky::new(m.clone()).ok_or(Error::NotPositiveDefinite)?;
    Ok(chol.solve(b))
}

/// Minimum-norm least-squares solution of `a x = b` for every column of `b`.
/// Singular values below `rel_tol · σ_max` are treated as zero.
pub fn lstsq_min_norm(a: &Mat, b: &Mat, rel_tol: f64) -> Mat {
    let (m, n) = (a.nrows(), a.ncols());
    if m == 0 || n == 0 {
        return Mat::zeros(n, b.ncols());
    }
    // nalgebra's SVD loses accuracy on wide matrices, so always factor the
    // tall orientation and read the pseudo-inverse off accordingly.
    let wide = m < n;
    let svd = if wide { a.transpose().svd(true, true) } else { a.clone().svd(true, true) };
    let u = svd.u.as_ref().expect("u requested");
    let vt = svd.v_t.as_ref().expect("v_t requested");
    let smax = svd.singular_values.iter().fold(0.0f64, |x, &s| x.max(s));
    let cut = smax * rel_tol;
    let mut scaled = if wide { vt * b } else { u.transpose() * b };
    for (i, &s) in svd.singular_values.iter().enumerate() {
        let f = if s > cut { 1.0 / s } else { 0.0 };
        for j in 0..scaled.ncols() {
            scaled[(i, j)] *= f;
        }
    }
    if wide {
        u * scaled
    } else {
        vt.transpose() * scaled
    }
}

/// Singular values, computed from whichever of `a`, `aᵀ` is tall.
pub fn singular_values(a: &Mat) -> nalgebra::DVector<f64> {
    if a.nrows() < a.ncols() {
        a.transpose().singular_values()
    } else {
        a.clone().singular_values()
    }
}

/// Numerical rank from singular values with a relative cutoff.
pub fn numerical_rank(a: &Mat, rel_tol: f64) -> usize {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0;
    }
    let s = singular_values(a);
    let smax = s.iter().fold(0.0f64, |x, &v| x.max(v));
    if smax == 0.0 {
        return 0;
    }
    s.iter().filter(|&&v| v > rel_tol * smax).count()
}

/// Orthonormal basis (columns) of the null space of `a`; singular values
/// below `rel_tol · σ_max` count as zero.
pub fn null_space(a: &Mat, rel_tol: f64) -> Mat {
    let (m, n) = (a.nrows(), a.ncols());
    if n == 0 {
        return Mat::zeros(0, 0);
    }
    // Pad to at least square so the SVD returns a full right basis.
    let mut padded = Mat::zeros(m.max(n), n);
    padded.view_mut((0, 0), (m, n)).copy_from(a);
    let svd = padded.svd(false, true);
    let vt = svd.v_t.as_ref().expect("v_t requested");
    let smax = svd.singular_values.iter().fold(0.0f64, |x, &s| x.max(s));
    let keep: Vec<usize> = (0..n).filter(|&i| svd.singular_values[i] <= rel_tol * smax || smax == 0.0).collect();
    Mat::from_fn(n, keep.len(), |r, c| vt[(keep[c], r)])
}

/// `xᵀ m y`.
pub fn inner(m: &Mat, x: &[f64], y: &[f64]) -> f64 {
    let n = m.nrows();
    let mut acc = CompensatedSum::new();
    for i in 0..n {
        if x[i] == 0.0 {
            continue;
        }
        let mut row = 0.0;
        for j in 0..n {
            row += m[(i, j)] * y[j];
        }
        acc.add(x[i] * row);
    }
    acc.value()
}

pub fn mat_vec(m: &Mat, x: &[f64]) -> Vec<f64> {
    let mut out = alloc::vec![0.0; m.nrows()];
    for j in 0..m.ncols() {
        let xj = x[j];
        if xj == 0.0 {
            continue;
        }
        for i in 0..m.nrows() {
            out[i] += m[(i, j)] * xj;
        }
    }
    out
}

pub fn column(m: &Mat, j: usize) -> Vec<f64> {
    m.column(j).iter().copied().collect()
}

pub fn from_columns(rows: usize, cols: &[Vec<f64>]) -> Mat {
    let mut m = Mat::zeros(rows, cols.len());
    for (j, c) in cols.iter().enumerate() {
        for i in 0..rows {
            m[(i, j)] = c[i];
        }
    }
    m
}

pub fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn sub(x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}

pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
