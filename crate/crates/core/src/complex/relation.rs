//! Heuristic detection of small integer relations between real numbers.
//!
//! Floating point cannot decide ℚ-linear independence; these routines search
//! for relations with bounded coefficients that hold to a fixed precision.
//! Pairs are tested through continued-fraction convergents, which are the
//! best rational approximations and therefore find any qualifying relation.

use alloc::vec::Vec;

use num_integer::Integer;
#[allow(unused_imports)]
use num_traits::Float;

/// Default coefficient bound.
pub const MAX_COEFF: u64 = 1_000_000;
/// Default relative precision.
pub const PRECISION: f64 = 1e-12;

/// Convergents `p/q` of `r ≥ 0` with `q ≤ max_den`.
fn convergents(r: f64, max_den: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    if !r.is_finite() || r < 0.0 {
        return out;
    }
    let (mut p0, mut q0, mut p1, mut q1) = (0u128, 1u128, 1u128, 0u128);
    let mut x = r;
    for _ in 0..64 {
        let a = x.floor();
        if a > 1e18 {
            break;
        }
        let a = a as u128;
        let (p2, q2) = (a * p1 + p0, a * q1 + q0);
        if q2 > max_den as u128 || p2 > u64::MAX as u128 {
            break;
        }
        out.push((p2 as u64, q2 as u64));
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let frac = x - a as f64;
        if frac < 1e-300 {
            break;
        }
        x = 1.0 / frac;
    }
    out
}

/// Finds `(a, b)` with `1 ≤ |a|, |b| ≤ max_coeff` and `a·x ≈ b·y`, i.e.
/// `|a x − b y| ≤ tol · max(|x|, |y|)`.
pub fn pairwise_relation(x: f64, y: f64, max_coeff: u64, tol: f64) -> Option<(i64, i64)> {
    if x == 0.0 || y == 0.0 {
        // A zero integral is a relation with any coefficient.
        return Some((if x == 0.0 { 1 } else { 0 }, if y == 0.0 { 1 } else { 0 }));
    }
    let sign = if (x < 0.0) != (y < 0.0) { -1 } else { 1 };
    let (ax, ay) = (x.abs(), y.abs());
    let scale = ax.max(ay);
    // a x = b y  ⇔  x / y = b / a.
    for (p, q) in convergents(ax / ay, max_coeff) {
        if p == 0 || p > max_coeff {
            continue;
        }
        if (q as f64 * ax - p as f64 * ay).abs() <= tol * scale {
            return Some((q as i64, sign * p as i64));
        }
    }
    None
}

/// Smallest-denominator `p/q` with `q ≤ max_den` and `|q·x − p| ≤ tol`.
pub fn rational_approx(x: f64, max_den: u64, tol: f64) -> Option<(i64, u64)> {
    let sign = if x < 0.0 { -1 } else { 1 };
    let ax = x.abs();
    if ax < tol {
        return Some((0, 1));
    }
    convergents(ax, max_den).into_iter().find(|&(p, q)| (q as f64 * ax - p as f64).abs() <= tol).map(|(p, q)| (sign * p as i64, q))
}

/// Smallest `n ≥ 1` with `n·xᵢ` within `tol` of an integer for every `i`,
/// searched through rational approximations with denominators `≤ max_den`.
pub fn common_denominator(xs: &[f64], max_den: u64, tol: f64) -> Option<u64> {
    let mut n = 1u64;
    for &x in xs {
        let (_, q) = rational_approx(x, max_den, tol)?;
        n = n.lcm(&q);
        if n > max_den {
            return None;
        }
    }
    Some(n)
}
