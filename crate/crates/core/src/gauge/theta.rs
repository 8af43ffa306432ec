use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::linalg::{CompensatedSum, Mat};
use crate::{Error, Result};

pub type CMat = nalgebra::DMatrix<Complex64>;

/// Default bound on the neglected part of a theta sum.
pub const THETA_TOLERANCE: f64 = 1e-12;

/// Largest number of lattice points summed before giving up.
pub const MAX_THETA_TERMS: usize = 20_000_000;

/// A truncated theta sum with a rigorous bound on what was left out.
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaValue {
    pub value: Complex64,
    /// The sum runs over `‖v‖_∞ ≤ radius`.
    pub radius: usize,
    /// Upper bound on `|Θ − value|`.
    pub tail_bound: f64,
    pub terms: usize,
}

/// Smallest eigenvalue of `Im A`.
pub fn im_min_eigenvalue(a: &CMat) -> Result<f64> {
    let k = a.nrows();
    if a.ncols() != k {
        return Err(Error::Shape("theta needs a square matrix".into()));
    }
    if k == 0 {
        return Ok(f64::INFINITY);
    }
    let im = Mat::from_fn(k, k, |r, c| 0.5 * (a[(r, c)].im + a[(c, r)].im));
    let lo = im.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
    if lo.is_finite() && lo > 0.0 {
        Ok(lo)
    } else {
        Err(Error::NotPositiveDefinite)
    }
}

/// Bound on `Σ_{‖v‖_∞ > R} |exp(πi vᵀAv)|` for `k × k` matrices with
/// `λ_min(Im A) ≥ lambda`.
///
/// With `a = πλ`, every term is at most `∏ e^{−a v_i²}`, so the tail is at
/// most `(S_R + t)^k − S_R^k ≤ k t (S_R + t)^{k−1}` where `S_R` sums
/// `e^{−a m²}` over `|m| ≤ R` and `t` bounds the rest by a geometric series.
pub fn theta_tail_bound(lambda: f64, k: usize, radius: usize) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let a = core::f64::consts::PI * lambda;
    let s: f64 = 1.0 + 2.0 * (1..=radius).map(|m| (-a * (m * m) as f64).exp()).sum::<f64>();
    let r1 = (radius + 1) as f64;
    let t = 2.0 * (-a * r1 * r1).exp() / (1.0 - (-a * (2.0 * radius as f64 + 3.0)).exp());
    k as f64 * t * (s + t).powi(k as i32 - 1)
}

fn count_terms(k: usize, radius: usize) -> Option<usize> {
    (2 * radius + 1).checked_pow(k as u32)
}

/// `Σ_{‖v‖_∞ ≤ R} exp(πi vᵀAv + 2πi vᵀb)`.
pub fn theta_fixed(a: &CMat, shift: &[f64], radius: usize) -> Result<ThetaValue> {
    let lambda = im_min_eigenvalue(a)?;
    let k = a.nrows();
    if shift.len() != k {
        return Err(Error::Shape("theta characteristic".into()));
    }
    let terms = count_terms(k, radius)
        .filter(|&t| t <= MAX_THETA_TERMS)
        .ok_or(Error::TruncationInsufficient { radius, tail: theta_tail_bound(lambda, k, radius) })?;
    let r = radius as i64;
    let mut v = vec![-r; k];
    let (mut re, mut im) = (CompensatedSum::new(), CompensatedSum::new());
    let pi = core::f64::consts::PI;
    for _ in 0..terms {
        let mut quad = Complex64::new(0.0, 0.0);
        for i in 0..k {
            let vi = v[i] as f64;
            quad += a[(i, i)] * vi * vi;
            for j in (i + 1)..k {
                quad += (a[(i, j)] + a[(j, i)]) * vi * v[j] as f64;
            }
        }
        let lin: f64 = v.iter().zip(shift).map(|(&x, b)| x as f64 * b).sum();
        let z = (Complex64::i() * pi * quad + Complex64::new(0.0, 2.0 * pi * lin)).exp();
        re.add(z.re);
        im.add(z.im);
        for x in v.iter_mut() {
            if *x < r {
                *x += 1;
                break;
            }
            *x = -r;
        }
    }
    Ok(ThetaValue { value: Complex64::new(re.value(), im.value()), radius, tail_bound: theta_tail_bound(lambda, k, radius), terms })
}

/// Smallest radius `≥ start` whose tail bound is below `tol`.
pub fn theta_radius(lambda: f64, k: usize, start: usize, tol: f64) -> Result<usize> {
    let mut radius = start;
    loop {
        let tail = theta_tail_bound(lambda, k, radius);
        if tail < tol {
            return Ok(radius);
        }
        match count_terms(k, radius + 1) {
            Some(t) if t <= MAX_THETA_TERMS => radius += 1,
            _ => return Err(Error::TruncationInsufficient { radius, tail }),
        }
    }
}

/// `Θ(A, b) = Σ_{v ∈ ℤ^k} exp(πi vᵀAv + 2πi vᵀb)`, with the radius grown from
/// `start` until the tail bound drops below `tol`.
pub fn theta_with_characteristic(a: &CMat, shift: &[f64], start: usize, tol: f64) -> Result<ThetaValue> {
    let lambda = im_min_eigenvalue(a)?;
    let radius = theta_radius(lambda, a.nrows(), start, tol)?;
    theta_fixed(a, shift, radius)
}

/// `Θ_k(A)` to within [`THETA_TOLERANCE`].
pub fn theta(a: &CMat, start: usize) -> Result<ThetaValue> {
    theta_with_characteristic(a, &vec![0.0; a.nrows()], start, THETA_TOLERANCE)
}

/// `i · m` as a complex matrix.
pub fn times_i(m: &Mat) -> CMat {
    CMat::from_fn(m.nrows(), m.ncols(), |r, c| Complex64::new(0.0, m[(r, c)]))
}

/// Lattice points of the `∞`-ball of radius `r` in `ℤ^k`, in odometer order.
pub fn lattice_window(k: usize, r: usize) -> Vec<Vec<i64>> {
    let n = count_terms(k, r).unwrap_or(0);
    let r = r as i64;
    let mut out = Vec::with_capacity(n);
    let mut v = vec![-r; k];
    for _ in 0..n {
        out.push(v.clone());
        for x in v.iter_mut() {
            if *x < r {
                *x += 1;
                break;
            }
            *x = -r;
        }
    }
    out
}
