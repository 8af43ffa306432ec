use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::CompensatedSum;
use crate::{Error, Result};

/// The `(0, …, 0)` Fourier coefficient of a function on a torus.
#[derive(Clone, Debug, PartialEq)]
pub struct ZeroMode {
    pub value: f64,
    /// Points per axis of the grid that produced `value`.
    pub grid: usize,
    /// Change from the previous grid; zero for a constant function.
    pub change: f64,
}

fn grid_average<F: FnMut(&[f64]) -> f64>(dim: usize, n: usize, f: &mut F, first: &mut Option<f64>, constant: &mut bool) -> f64 {
    let total = n.pow(dim as u32);
    let mut idx = vec![0usize; dim];
    let mut z = vec![0.0; dim];
    let mut acc = CompensatedSum::new();
    for _ in 0..total {
        for (zi, &i) in z.iter_mut().zip(&idx) {
            *zi = i as f64 / n as f64;
        }
        let v = f(&z);
        match first {
            None => *first = Some(v),
            Some(f0) => *constant &= v.to_bits() == f0.to_bits(),
        }
        acc.add(v);
        for i in idx.iter_mut() {
            *i += 1;
            if *i < n {
                break;
            }
            *i = 0;
        }
    }
    acc.value() / total as f64
}

/// Average of `f` over `[0, 1)^dim` on uniform grids, doubling the grid from
/// `grid` points per axis until two successive averages differ by at most
/// `tol` (relative to `max(1, |value|)`).
///
/// Uniform averages are exact for trigonometric polynomials whose degree
/// is below the grid size, so convergence is immediate for those. A
/// function that takes the same value at every grid point is returned as
/// that value, bit for bit.
pub fn fourier_zero_mode<F: FnMut(&[f64]) -> f64>(dim: usize, mut f: F, grid: usize, max_grid: usize, tol: f64) -> Result<ZeroMode> {
    if dim == 0 {
        return Ok(ZeroMode { value: f(&[]), grid: 1, change: 0.0 });
    }
    let mut n = grid.max(1);
    let mut first = None;
    let mut constant = true;
    let mut prev = grid_average(dim, n, &mut f, &mut first, &mut constant);
    if constant {
        return Ok(ZeroMode { value: first.unwrap_or(prev), grid: n, change: 0.0 });
    }
    let mut change = f64::INFINITY;
    while n * 2 <= max_grid {
        n *= 2;
        let next = grid_average(dim, n, &mut f, &mut first, &mut constant);
        change = (next - prev).abs();
        prev = next;
        if change <= tol * next.abs().max(1.0) {
            return Ok(ZeroMode { value: next, grid: n, change });
        }
    }
    Err(Error::NonConvergent { what: "fourier zero mode".into(), change })
}

/// Zero modes of a complex function given by its real and imaginary parts.
pub fn complex_zero_mode<F: FnMut(&[f64]) -> (f64, f64)>(
    dim: usize,
    mut f: F,
    grid: usize,
    max_grid: usize,
    tol: f64,
) -> Result<(f64, f64)> {
    let re = fourier_zero_mode(dim, |z| f(z).0, grid, max_grid, tol)?;
    let im = fourier_zero_mode(dim, |z| f(z).1, grid, max_grid, tol)?;
    Ok((re.value, im.value))
}

/// Uniform grid points of the torus, for tests and callers that tabulate.
pub fn torus_grid(dim: usize, n: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    let mut idx = vec![0usize; dim];
    for _ in 0..n.pow(dim as u32) {
        out.push(idx.iter().map(|&i| i as f64 / n as f64).collect());
        for i in idx.iter_mut() {
            *i += 1;
            if *i < n {
                break;
            }
            *i = 0;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;
    use num_complex::Complex64;

    #[test]
    fn constant_function_is_returned_exactly() {
        let r = fourier_zero_mode(2, |_| 0.1, 4, 64, 1e-12).unwrap();
        assert_eq!(r.value, 0.1);
        assert_eq!(fourier_zero_mode(1, |_| 1.0, 4, 64, 1e-12).unwrap().value, 1.0);
        assert_eq!(fourier_zero_mode(0, |_| 3.5, 4, 64, 1e-12).unwrap().value, 3.5);
    }

    #[test]
    fn nonzero_modes_integrate_out() {
        let (re, im) = complex_zero_mode(2, |z| ((2.0 * PI * z[0]).cos(), (2.0 * PI * z[0]).sin()), 4, 64, 1e-12).unwrap();
        assert!(re.abs() < 1e-12 && im.abs() < 1e-12);
    }

    #[test]
    fn modulus_squared_of_a_fourier_polynomial() {
        let a = [
            Complex64::new(0.3, 0.1),
            Complex64::new(-0.7, 0.2),
            Complex64::new(1.1, 0.0),
            Complex64::new(0.0, 0.4),
            Complex64::new(0.25, -0.5),
        ];
        let f = |z: &[f64]| {
            let s: Complex64 = a.iter().enumerate().map(|(m, c)| c * Complex64::from_polar(1.0, 2.0 * PI * (m as f64 - 2.0) * z[0])).sum();
            s.norm_sqr()
        };
        let want: f64 = a.iter().map(|c| c.norm_sqr()).sum();
        let r = fourier_zero_mode(1, f, 4, 256, 1e-13).unwrap();
        assert!((r.value - want).abs() < 1e-13, "{} vs {want}", r.value);
    }

    #[test]
    fn slow_convergence_is_reported() {
        let f = |z: &[f64]| if z[0] < 0.3 { 1.0 } else { 0.0 };
        assert!(matches!(fourier_zero_mode(1, f, 8, 16, 1e-12), Err(Error::NonConvergent { .. })));
        assert_eq!(torus_grid(2, 3).len(), 9);
    }
}
