//! Exact integer linear algebra: Smith normal form, integral (co)homology
//! with torsion, and the chain maps that relate a complex to its subdivision.

mod chain_map;
mod homology;
mod snf;
mod topology;

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::linalg::SparseInt;
use crate::{Error, Result};

pub use chain_map::{subdivision_chain_map, vertex_chain_map};
pub use homology::{cohomology, homology, quotient, Coefficients, HomologySummary, Quotient};
pub use snf::{smith_normal_form, SnfResult};
pub use topology::{ClassCoords, DegreeTopology, Topology};

/// Dense integer matrix with arbitrary-precision entries.
#[derive(Clone, PartialEq, Eq)]
pub struct IntegerMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl fmt::Debug for IntegerMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "IntegerMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                write!(f, "{} ", self.get(r, c))?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl IntegerMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|x| x.len() == c), "ragged rows");
        Self { rows: r, cols: c, data: rows.iter().flatten().map(|&v| BigInt::from(v)).collect() }
    }

    pub fn from_sparse(s: &SparseInt) -> Self {
        let mut m = Self::zeros(s.rows(), s.cols());
        for (r, c, v) in s.triplets() {
            m.data[r * s.cols() + c] = BigInt::from(v);
        }
        m
    }

    pub(crate) fn from_data(rows: usize, cols: usize, data: Vec<BigInt>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &BigInt {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: BigInt) {
        self.data[r * self.cols + c] = v;
    }

    pub fn column(&self, c: usize) -> Vec<BigInt> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn row(&self, r: usize) -> Vec<BigInt> {
        self.data[r * self.cols..(r + 1) * self.cols].to_vec()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.get(r, c).clone();
            }
        }
        t
    }

    /// Exact product.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "shape mismatch in product");
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let b = other.get(k, c);
                    if !b.is_zero() {
                        out.data[r * other.cols + c] += a * b;
                    }
                }
            }
        }
        out
    }

    /// Columns `range` as a new matrix.
    pub fn columns(&self, range: core::ops::Range<usize>) -> Self {
        let mut out = Self::zeros(self.rows, range.len());
        for r in 0..self.rows {
            for (j, c) in range.clone().enumerate() {
                out.data[r * out.cols + j] = self.get(r, c).clone();
            }
        }
        out
    }

    pub fn rows_range(&self, range: core::ops::Range<usize>) -> Self {
        let mut out = Self::zeros(range.len(), self.cols);
        for (i, r) in range.clone().enumerate() {
            for c in 0..self.cols {
                out.data[i * self.cols + c] = self.get(r, c).clone();
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a = self.data.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n {
            if a[k * n + k].is_zero() {
                let Some(p) = ((k + 1)..n).find(|&i| !a[i * n + k].is_zero()) else {
                    return BigInt::zero();
                };
                for c in 0..n {
                    a.swap(k * n + c, p * n + c);
                }
                sign = -sign;
            }
            for i in (k + 1)..n {
                for j in (k + 1)..n {
                    let v = &a[i * n + j] * &a[k * n + k] - &a[i * n + k] * &a[k * n + j];
                    a[i * n + j] = v / &prev;
                }
            }
            prev = a[k * n + k].clone();
        }
        sign * a[n * n - 1].clone()
    }

    /// Entries as `i64`, if they all fit.
    pub fn to_i64_rows(&self) -> Result<Vec<Vec<i64>>> {
        (0..self.rows)
            .map(|r| {
                (0..self.cols)
                    .map(|c| self.get(r, c).to_i64().ok_or_else(|| Error::InvalidInput("integer entry exceeds i64".into())))
                    .collect()
            })
            .collect()
    }

    pub fn column_i64(&self, c: usize) -> Result<Vec<i64>> {
        (0..self.rows).map(|r| self.get(r, c).to_i64().ok_or_else(|| Error::InvalidInput("integer entry exceeds i64".into()))).collect()
    }

    /// Plain-text triplet serialization: header `rows cols nnz`, then one
    /// `row col value` line per nonzero entry.
    pub fn to_triplet_text(&self) -> alloc::string::String {
        use core::fmt::Write;
        let mut s = alloc::string::String::new();
        let nnz = self.data.iter().filter(|v| !v.is_zero()).count();
        let _ = writeln!(s, "{} {} {}", self.rows, self.cols, nnz);
        for r in 0..self.rows {
            for c in 0..self.cols {
                let v = self.get(r, c);
                if !v.is_zero() {
                    let _ = writeln!(s, "{r} {c} {v}");
                }
            }
        }
        s
    }

    pub fn from_triplet_text(text: &str) -> Result<Self> {
        let bad = |m: &str| Error::InvalidInput(alloc::format!("triplet text: {m}"));
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let head: Vec<usize> = lines
            .next()
            .ok_or_else(|| bad("empty"))?
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| bad("header")))
            .collect::<Result<_>>()?;
        let [rows, cols, nnz] = head[..] else { return Err(bad("header needs three fields")) };
        let mut m = Self::zeros(rows, cols);
        let mut seen = 0;
        for l in lines {
            let t: Vec<&str> = l.split_whitespace().collect();
            let [r, c, v] = t[..] else { return Err(bad("entry needs three fields")) };
            let r: usize = r.parse().map_err(|_| bad("row"))?;
            let c: usize = c.parse().map_err(|_| bad("col"))?;
            let v: BigInt = v.parse().map_err(|_| bad("value"))?;
            if r >= rows || c >= cols {
                return Err(bad("entry out of range"));
            }
            m.set(r, c, v);
            seen += 1;
        }
        if seen != nnz {
            return Err(bad("entry count does not match header"));
        }
        Ok(m)
    }

    pub(crate) fn max_abs_bits(&self) -> u64 {
        self.data.iter().map(|v| v.abs().bits()).max().unwrap_or(0)
    }
}

/// Inverse of a unimodular integer matrix, or `None` if it is not unimodular.
pub fn unimodular_inverse(m: &IntegerMatrix) -> Option<IntegerMatrix> {
    let n = m.rows();
    if m.cols() != n {
        return None;
    }
    let s = smith_normal_form(m);
    if s.rank != n || s.diag.iter().any(|d| !d.is_one()) {
        return None;
    }
    // U m V = I  ⇒  m⁻¹ = V U.
    Some(s.v.mul(&s.u))
}

/// Integer solutions of `A x = y`, reusing one Smith normal form of `A`.
#[derive(Clone, Debug)]
pub struct IntegerSolver {
    snf: SnfResult,
    cols: usize,
}

impl IntegerSolver {
    pub fn new(a: &IntegerMatrix) -> Self {
        Self { snf: smith_normal_form(a), cols: a.cols() }
    }

    /// An integer `x` with `A x = y`, or `None` when there is none.
    pub fn solve(&self, y: &[i64]) -> Option<Vec<i64>> {
        let s = &self.snf;
        let m = s.u.rows();
        if y.len() != m {
            return None;
        }
        // U A V = D, so with w = V⁻¹ x the system reads D w = U y.
        let uy: Vec<BigInt> = (0..m).map(|r| (0..m).fold(BigInt::zero(), |acc, c| acc + s.u.get(r, c) * BigInt::from(y[c]))).collect();
        if uy[s.rank..].iter().any(|v| !v.is_zero()) {
            return None;
        }
        let mut w = vec![BigInt::zero(); self.cols];
        for i in 0..s.rank {
            let (q, r) = uy[i].div_rem(&s.diag[i]);
            if !r.is_zero() {
                return None;
            }
            w[i] = q;
        }
        (0..self.cols).map(|r| (0..self.cols).fold(BigInt::zero(), |acc, c| acc + s.v.get(r, c) * &w[c]).to_i64()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_solver_respects_divisibility() {
        let a = IntegerMatrix::from_rows(&[vec![2, 0], vec![0, 3], vec![0, 0]]);
        let s = IntegerSolver::new(&a);
        assert_eq!(s.solve(&[4, 9, 0]), Some(vec![2, 3]));
        assert_eq!(s.solve(&[1, 0, 0]), None);
        assert_eq!(s.solve(&[0, 0, 1]), None);
        let b = IntegerMatrix::from_rows(&[vec![1, -1, 0], vec![0, 1, -1], vec![-1, 0, 1]]);
        let y = [3, -5, 2];
        let x = IntegerSolver::new(&b).solve(&y).unwrap();
        assert_eq!(b.mul(&IntegerMatrix::from_rows(&[x.clone()]).transpose()).column_i64(0).unwrap(), y.to_vec());
    }

    #[test]
    fn bareiss_determinant() {
        let m = IntegerMatrix::from_rows(&[vec![2, 0, 1], vec![1, 3, 2], vec![1, 1, 2]]);
        assert_eq!(m.determinant(), BigInt::from(6));
        let s = IntegerMatrix::from_rows(&[vec![0, 1], vec![1, 0]]);
        assert_eq!(s.determinant(), BigInt::from(-1));
    }

    #[test]
    fn unimodular_inverse_round_trip() {
        let m = IntegerMatrix::from_rows(&[vec![2, 3], vec![1, 2]]);
        let inv = unimodular_inverse(&m).unwrap();
        assert_eq!(m.mul(&inv), IntegerMatrix::identity(2));
        assert!(unimodular_inverse(&IntegerMatrix::from_rows(&[vec![2, 0], vec![0, 1]])).is_none());
    }

    #[test]
    fn triplet_text_round_trip() {
        let m = IntegerMatrix::from_rows(&[vec![0, -3], vec![7, 0]]);
        let t = m.to_triplet_text();
        assert_eq!(IntegerMatrix::from_triplet_text(&t).unwrap(), m);
        assert!(IntegerMatrix::from_triplet_text("2 2 1\n5 0 1\n").is_err());
    }
}
