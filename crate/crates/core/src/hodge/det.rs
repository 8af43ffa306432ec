use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use super::{HodgeComplex, Spectrum};
use crate::linalg::{compensated_sum, independent_rows, logdet_spd, symmetrize, Mat};
use crate::{Error, Result};

/// Invariant subspace of `Δ_p` on which a determinant is taken.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Subspace {
    /// `im δ_{p+1}`, where `Δ_p = δd`.
    Coexact,
    /// `im d_{p−1}`, where `Δ_p = dδ`.
    Exact,
    /// `(ℋ^p)^⊥`, the sum of the two.
    Nonzero,
}

/// `log det` of a Laplacian block, computed three ways.
#[derive(Clone, Debug, PartialEq)]
pub struct RestrictedDet {
    pub degree: usize,
    pub subspace: Subspace,
    pub dimension: usize,
    /// Compensated sum of the logarithms of the nonzero eigenvalues.
    pub log_det: f64,
    /// `−ζ′(0)` by a complex-step derivative of the spectral zeta function.
    pub zeta_log_det: f64,
    /// Ratio of Cholesky determinants on a pivot basis of the subspace.
    pub cholesky_log_det: f64,
}

impl RestrictedDet {
    /// `det` itself; 1 on an empty block.
    pub fn det(&self) -> f64 {
        self.log_det.exp()
    }

    /// Largest relative disagreement between the three routes.
    pub fn spread(&self) -> f64 {
        let v = [self.log_det, self.zeta_log_det, self.cholesky_log_det];
        let scale = v.iter().fold(1.0f64, |a, b| a.max(b.abs()));
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (hi - lo) / scale
    }
}

pub fn log_det_from_spectrum(nonzero: &[f64]) -> f64 {
    compensated_sum(nonzero.iter().map(|l| l.ln()))
}

/// `ζ(s) = Σ λ^{−s}` over positive `λ`.
pub fn zeta(nonzero: &[f64], s: Complex64) -> Complex64 {
    let (mut re, mut im) = (Vec::with_capacity(nonzero.len()), Vec::with_capacity(nonzero.len()));
    for &l in nonzero {
        let t = (-s * l.ln()).exp();
        re.push(t.re);
        im.push(t.im);
    }
    Complex64::new(compensated_sum(re), compensated_sum(im))
}

const COMPLEX_STEP: f64 = 1e-20;

/// `−ζ′(0)` from `Im ζ(ih) / h`, which has no cancellation error.
pub fn zeta_log_det(nonzero: &[f64]) -> f64 {
    -zeta(nonzero, Complex64::new(0.0, COMPLEX_STEP)).im / COMPLEX_STEP
}

fn select_columns(m: &Mat, cols: &[usize]) -> Mat {
    Mat::from_fn(m.nrows(), cols.len(), |r, c| m[(r, cols[c])])
}

fn block_ratio(form: &Mat, gram: &Mat, q: &Mat) -> Result<f64> {
    let mut a = q.transpose() * form * q;
    let mut g = q.transpose() * gram * q;
    symmetrize(&mut a);
    symmetrize(&mut g);
    Ok(logdet_spd(&a)? - logdet_spd(&g)?)
}

fn cholesky_path(hc: &HodgeComplex, p: usize, subspace: Subspace) -> Result<f64> {
    let x = hc.complex();
    let m = hc.gram(p);
    let coexact = || -> Result<f64> {
        if p == hc.dim() {
            return Ok(0.0);
        }
        let rows = independent_rows(&x.coboundary(p));
        let dt = select_columns(&hc.d(p).transpose(), &rows);
        let q = crate::linalg::cholesky_solve(m, &dt)?;
        block_ratio(&hc.up_form(p), m, &q)
    };
    let exact = || -> Result<f64> {
        if p == 0 {
            return Ok(0.0);
        }
        let cols = independent_rows(x.boundary(p)?);
        let q = select_columns(hc.d(p - 1), &cols);
        block_ratio(&hc.down_form(p)?, m, &q)
    };
    match subspace {
        Subspace::Coexact => coexact(),
        Subspace::Exact => exact(),
        Subspace::Nonzero => Ok(coexact()? + exact()?),
    }
}

fn nonzero_values(hc: &HodgeComplex, p: usize, subspace: Subspace) -> Result<Vec<f64>> {
    let take = |s: Spectrum| s.nonzero().to_vec();
    Ok(match subspace {
        Subspace::Coexact => take(hc.up_spectrum(p)?),
        Subspace::Exact => take(hc.down_spectrum(p)?),
        Subspace::Nonzero => {
            let mut v = take(hc.up_spectrum(p)?);
            v.extend(take(hc.down_spectrum(p)?));
            v.sort_by(f64::total_cmp);
            v
        }
    })
}

pub(super) fn restricted_determinant(hc: &HodgeComplex, p: usize, subspace: Subspace) -> Result<RestrictedDet> {
    if p > hc.dim() {
        return Err(Error::DegreeOutOfRange { degree: p, max: hc.dim() });
    }
    let values = nonzero_values(hc, p, subspace)?;
    Ok(RestrictedDet {
        degree: p,
        subspace,
        dimension: values.len(),
        log_det: log_det_from_spectrum(&values),
        zeta_log_det: zeta_log_det(&values),
        cholesky_log_det: cholesky_path(hc, p, subspace)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::fixtures;
    use crate::hodge::HodgeOptions;
    use alloc::sync::Arc;

    #[test]
    fn zeta_route_matches_log_sum() {
        let v = [1.0, 2.0, 3.0];
        assert!((log_det_from_spectrum(&v) - 6f64.ln()).abs() < 1e-15);
        assert!((zeta_log_det(&v) - 6f64.ln()).abs() < 1e-15);
        assert_eq!(zeta_log_det(&[]), 0.0);
        let z = zeta(&v, Complex64::new(1.0, 0.0));
        assert!((z.re - (1.0 + 0.5 + 1.0 / 3.0)).abs() < 1e-15 && z.im == 0.0);
    }

    #[test]
    fn three_routes_agree_on_small_complexes() {
        for x in [fixtures::cycle(7), fixtures::torus7(), fixtures::tetrahedron_boundary()] {
            let hc = super::super::HodgeComplex::with_computed_topology(Arc::new(x), HodgeOptions::default()).unwrap();
            for p in 0..=hc.dim() {
                for s in [Subspace::Coexact, Subspace::Exact, Subspace::Nonzero] {
                    let r = hc.restricted_determinant(p, s).unwrap();
                    assert!(r.spread() < 1e-9, "degree {p} {s:?}: {r:?}");
                    assert!((r.zeta_log_det - r.log_det).abs() <= 1e-10 * r.log_det.abs().max(1.0));
                }
            }
            let top = hc.restricted_determinant(hc.dim(), Subspace::Coexact).unwrap();
            assert_eq!((top.dimension, top.det()), (0, 1.0));
        }
    }
}
