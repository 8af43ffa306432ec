//! Whitney forms, the de Rham map, the embedding `W′` of cochains on a
//! complex into cochains on a subdivision, and the L² inner product of
//! Whitney forms.
//!
//! Every integral is a closed-form barycentric integral of a polynomial of
//! degree at most two, so the float path is exact up to rounding and the
//! rational path is exact.

mod embed;
mod form;
mod gram;

use alloc::vec::Vec;
use core::fmt::Debug;
use core::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::complex::{ParentLink, SimplicialComplex};
use crate::linalg::SparseInt;
use crate::{Error, Result};

pub use embed::{embed, embedding_matrix, embedding_triplets};
pub use form::{whitney, Term, WhitneyForm};
pub use gram::{gram_matrix, inner_product, top_gram};

/// Coefficient field for Whitney computations: `f64` or exact rationals.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_i64(v: i64) -> Self;
    fn to_f64(&self) -> f64;
    /// Vertex supports of a subdivision in this field.
    fn supports(link: &ParentLink) -> Result<Vec<Vec<(usize, Self)>>>;
}

impl Scalar for f64 {
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn supports(link: &ParentLink) -> Result<Vec<Vec<(usize, Self)>>> {
        Ok(link.support.clone())
    }
}

impl Scalar for BigRational {
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn supports(link: &ParentLink) -> Result<Vec<Vec<(usize, Self)>>> {
        link.exact_support.clone().ok_or_else(|| Error::InvalidInput("subdivision has no exact vertex weights".into()))
    }
}

/// A `k`-cochain: one coefficient per `k`-simplex in the complex's order.
#[derive(Clone, Debug, PartialEq)]
pub struct Cochain<T = f64> {
    pub degree: usize,
    pub values: Vec<T>,
}

impl<T: Scalar> Cochain<T> {
    pub fn new(x: &SimplicialComplex, degree: usize, values: Vec<T>) -> Result<Self> {
        if degree > x.dim() {
            return Err(Error::DegreeOutOfRange { degree, max: x.dim() });
        }
        if values.len() != x.count(degree) {
            return Err(Error::Shape(alloc::format!("{} values for {} simplices of degree {degree}", values.len(), x.count(degree))));
        }
        Ok(Self { degree, values })
    }

    pub fn zero(x: &SimplicialComplex, degree: usize) -> Self {
        Self { degree, values: alloc::vec![T::zero(); x.count(degree)] }
    }

    /// Elementary cochain dual to simplex `i`.
    pub fn elementary(x: &SimplicialComplex, degree: usize, i: usize) -> Self {
        let mut c = Self::zero(x, degree);
        c.values[i] = T::one();
        c
    }

    /// Coboundary `d`.
    pub fn d(&self, x: &SimplicialComplex) -> Self {
        Self { degree: self.degree + 1, values: apply_int(&x.coboundary(self.degree), &self.values) }
    }
}

/// Applies an integer matrix to a vector over any field.
pub fn apply_int<T: Scalar>(m: &SparseInt, v: &[T]) -> Vec<T> {
    (0..m.rows()).map(|r| m.row(r).fold(T::zero(), |acc, (c, a)| acc + T::from_i64(a) * v[c].clone())).collect()
}

/// Determinant by Gaussian elimination, pivoting on the largest magnitude.
pub(crate) fn det<T: Scalar>(mut a: Vec<Vec<T>>) -> T {
    let n = a.len();
    let mut out = T::one();
    for k in 0..n {
        let p = (k..n).filter(|&i| !a[i][k].is_zero()).max_by(|&i, &j| a[i][k].to_f64().abs().total_cmp(&a[j][k].to_f64().abs()));
        let Some(p) = p else { return T::zero() };
        if p != k {
            a.swap(p, k);
            out = -out;
        }
        let piv = a[k][k].clone();
        out = out * piv.clone();
        for i in (k + 1)..n {
            if a[i][k].is_zero() {
                continue;
            }
            let f = a[i][k].clone() / piv.clone();
            for j in k..n {
                let v = a[i][j].clone() - f.clone() * a[k][j].clone();
                a[i][j] = v;
            }
        }
    }
    out
}

/// Barycentric coordinates of each vertex of `x` with respect to the
/// vertices of `base`, composed through the chain of parent links.
pub fn base_coordinates<T: Scalar>(x: &SimplicialComplex, base: &SimplicialComplex) -> Result<Vec<Vec<(usize, T)>>> {
    if core::ptr::eq(x, base) {
        return Ok((0..x.n_vertices()).map(|v| alloc::vec![(v, T::one())]).collect());
    }
    let link = x.parent().ok_or(Error::NoParentLink)?;
    let up = base_coordinates::<T>(&link.parent, base)?;
    let local = T::supports(link)?;
    Ok(local
        .iter()
        .map(|s| {
            let mut acc: alloc::collections::BTreeMap<usize, T> = alloc::collections::BTreeMap::new();
            for (p, w) in s {
                for (b, wb) in &up[*p] {
                    let e = acc.entry(*b).or_insert_with(T::zero);
                    *e = e.clone() + w.clone() * wb.clone();
                }
            }
            acc.into_iter().filter(|(_, w)| !w.is_zero()).collect()
        })
        .collect())
}

fn factorial<T: Scalar>(k: usize) -> T {
    (1..=k).fold(T::one(), |acc, i| acc * T::from_i64(i as i64))
}

/// `∫_s μ_a dμ_B` (or `∫_s dμ_B` when `a` is `None`) over the simplex with
/// local barycentric vertex coordinates `pts`, in the order given.
pub(crate) fn term_integral<T: Scalar>(pts: &[Vec<T>], a: Option<usize>, wedge: &[usize]) -> T {
    let k = pts.len() - 1;
    debug_assert_eq!(wedge.len(), k);
    let g: Vec<Vec<T>> = (1..=k).map(|m| wedge.iter().map(|&j| pts[m][j].clone() - pts[0][j].clone()).collect()).collect();
    let d = det(g) / factorial::<T>(k);
    match a {
        None => d,
        Some(a) => {
            let avg = pts.iter().fold(T::zero(), |acc, p| acc + p[a].clone()) / T::from_i64(k as i64 + 1);
            avg * d
        }
    }
}

/// `∫_s W_σ` for the `k`-face `σ` (local indices, increasing) of a simplex
/// with local coordinates `pts` of the `k + 1` vertices of `s`.
pub(crate) fn elementary_integral<T: Scalar>(pts: &[Vec<T>], sigma: &[usize]) -> T {
    let k = sigma.len() - 1;
    let kf = factorial::<T>(k);
    let mut acc = T::zero();
    let mut rest: Vec<usize> = Vec::with_capacity(k);
    for i in 0..=k {
        rest.clear();
        rest.extend(sigma.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &v)| v));
        let v = term_integral(pts, Some(sigma[i]), &rest);
        acc = if i % 2 == 0 { acc + v } else { acc - v };
    }
    kf * acc
}

pub(crate) fn sign_of<T: Scalar>(s: i8) -> T {
    if s < 0 {
        -T::one()
    } else {
        T::one()
    }
}

/// Increasing `m`-element subsets of `0..n`.
pub(crate) fn subsets(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(m);
    fn rec(start: usize, n: usize, m: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, m, cur, out);
            cur.pop();
        }
    }
    rec(0, n, m, &mut cur, &mut out);
    out
}
