//! Integral homology and cohomology as quotients `ker B / im A` of free modules.

use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::{smith_normal_form, IntegerMatrix};
use crate::complex::SimplicialComplex;
use crate::{Error, Result};

/// Ring of coefficients for (co)homology summaries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coefficients {
    Integers,
    /// A field of characteristic zero; torsion is invisible.
    Rationals,
}

/// The quotient `ker B / im A ⊂ ℤᵐ` with explicit generators and coordinates.
#[derive(Clone, Debug)]
pub struct Quotient {
    /// Rank of `A`.
    pub rank: usize,
    /// Invariant factors of `A`.
    pub diag: Vec<BigInt>,
    /// `U` with `U A V = D`; row `i` is the coordinate functional of `P eᵢ`.
    pub u: IntegerMatrix,
    /// `P = U⁻¹`.
    pub p: IntegerMatrix,
    /// `V` with `U A V = D`.
    pub v: IntegerMatrix,
    /// Free generators as columns (`m × f`).
    pub free: IntegerMatrix,
    /// Coordinates of the free part: `c = free_coords · (U x)[rank..]`.
    pub free_coords: IntegerMatrix,
}

impl Quotient {
    pub fn ambient(&self) -> usize {
        self.u.rows()
    }

    pub fn free_rank(&self) -> usize {
        self.free.cols()
    }

    /// Indices `i < rank` with `dᵢ > 1`.
    pub fn torsion_indices(&self) -> Vec<usize> {
        (0..self.rank).filter(|&i| !self.diag[i].is_one()).collect()
    }

    pub fn torsion_orders(&self) -> Vec<BigInt> {
        self.torsion_indices().into_iter().map(|i| self.diag[i].clone()).collect()
    }

    /// Torsion generator `P eᵢ`.
    pub fn torsion_generator(&self, i: usize) -> Vec<BigInt> {
        self.p.column(i)
    }

    /// `x` with `A x = dᵢ · P eᵢ`, namely `V eᵢ`.
    pub fn torsion_primitive(&self, i: usize) -> Vec<BigInt> {
        self.v.column(i)
    }

    /// Free and torsion coordinates of an element of `ker B`.
    pub fn coordinates(&self, x: &[BigInt]) -> (Vec<BigInt>, Vec<BigInt>) {
        let y: Vec<BigInt> =
            (0..self.u.rows()).map(|r| (0..x.len()).fold(BigInt::zero(), |acc, c| acc + self.u.get(r, c) * &x[c])).collect();
        let tail = &y[self.rank..];
        let free = (0..self.free_coords.rows())
            .map(|r| (0..tail.len()).fold(BigInt::zero(), |acc, c| acc + self.free_coords.get(r, c) * &tail[c]))
            .collect();
        let tors = self.torsion_indices().into_iter().map(|i| y[i].mod_floor(&self.diag[i])).collect();
        (free, tors)
    }
}

/// Builds `ker B / im A` for `A: ℤᵃ → ℤᵐ`, `B: ℤᵐ → ℤᵇ` with `B A = 0`.
pub fn quotient(a: &IntegerMatrix, b: &IntegerMatrix) -> Result<Quotient> {
    let m = a.rows();
    if b.cols() != m {
        return Err(Error::Shape(alloc::format!("quotient: A has {m} rows but B has {} columns", b.cols())));
    }
    if !b.mul(a).is_zero() {
        return Err(Error::ExactnessViolation { node: "B·A ≠ 0".into() });
    }
    let s1 = smith_normal_form(a);
    let r = s1.rank;
    let p_tail = s1.u_inv.columns(r..m);
    let b2 = b.mul(&p_tail);
    let s2 = smith_normal_form(&b2);
    let k = s2.v.columns(s2.rank..b2.cols());
    let free = p_tail.mul(&k);
    let free_coords = s2.v_inv.rows_range(s2.rank..b2.cols());
    Ok(Quotient { rank: r, diag: s1.diag, u: s1.u, p: s1.u_inv, v: s1.v, free, free_coords })
}

/// Summary of a (co)homology group.
#[derive(Clone, Debug)]
pub struct HomologySummary {
    pub degree: usize,
    pub betti: usize,
    /// Orders of the cyclic torsion summands (empty over a field).
    pub torsion: Vec<BigInt>,
    /// Columns spanning the (co)cycles.
    pub cycle_basis: IntegerMatrix,
    /// Columns spanning the (co)boundaries.
    pub boundary_basis: IntegerMatrix,
}

fn boundary_dense(x: &SimplicialComplex, k: usize) -> Result<IntegerMatrix> {
    if k == 0 {
        return Ok(IntegerMatrix::zeros(0, x.count(0)));
    }
    if k == x.dim() + 1 {
        return Ok(IntegerMatrix::zeros(x.count(x.dim()), 0));
    }
    Ok(IntegerMatrix::from_sparse(x.boundary(k)?))
}

fn summary(q: &Quotient, a: &IntegerMatrix, degree: usize, coeffs: Coefficients) -> HomologySummary {
    let m = q.ambient();
    let mut cyc = IntegerMatrix::zeros(m, q.rank + q.free_rank());
    for r in 0..m {
        for c in 0..q.rank {
            cyc.set(r, c, q.p.get(r, c).clone());
        }
        for c in 0..q.free_rank() {
            cyc.set(r, q.rank + c, q.free.get(r, c).clone());
        }
    }
    let bnd = a.mul(&q.v.columns(0..q.rank));
    HomologySummary {
        degree,
        betti: q.free_rank(),
        torsion: match coeffs {
            Coefficients::Integers => q.torsion_orders(),
            Coefficients::Rationals => Vec::new(),
        },
        cycle_basis: cyc,
        boundary_basis: bnd,
    }
}

fn check(x: &SimplicialComplex, k: usize) -> Result<()> {
    if k > x.dim() {
        return Err(Error::DegreeOutOfRange { degree: k, max: x.dim() });
    }
    Ok(())
}

/// `H_k(X)` as `ker ∂_k / im ∂_{k+1}`.
pub fn homology(x: &SimplicialComplex, k: usize, coeffs: Coefficients) -> Result<HomologySummary> {
    check(x, k)?;
    let a = boundary_dense(x, k + 1)?;
    let b = boundary_dense(x, k)?;
    let q = quotient(&a, &b)?;
    Ok(summary(&q, &a, k, coeffs))
}

/// `H^k(X)` as `ker δ_k / im δ_{k-1}` with `δ_k = ∂_{k+1}ᵀ`.
pub fn cohomology(x: &SimplicialComplex, k: usize, coeffs: Coefficients) -> Result<HomologySummary> {
    check(x, k)?;
    let a = boundary_dense(x, k)?.transpose();
    let b = boundary_dense(x, k + 1)?.transpose();
    let q = quotient(&a, &b)?;
    Ok(summary(&q, &a, k, coeffs))
}
