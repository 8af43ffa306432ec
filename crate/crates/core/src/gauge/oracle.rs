use alloc::vec;
use alloc::vec::Vec;

use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::partition::{torsion_elements, wilson_zero_mode};
use super::theta::lattice_window;
use super::{ActionSpec, ObservableSpec};
use crate::characters::CharacterModel;
use crate::exact::ClassCoords;
use crate::hodge::Subspace;
use crate::linalg::{compensated_sum, from_columns, inner, logdet_spd, mat_vec, symmetrize, CompensatedSum, Mat};
use crate::whitney::gram_matrix;
use crate::{Error, Result};

/// Largest coexact slab the oracle accepts.
pub const MAX_ORACLE_DIM: usize = 32;
/// Largest number of classes the oracle sums.
pub const MAX_ORACLE_CLASSES: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleOptions {
    /// Monte Carlo samples; zero skips sampling.
    pub mc_samples: usize,
    pub seed: u64,
    /// Variance inflation of the sampling Gaussian.
    pub broadening: f64,
    /// Quadrature step in units of the standard deviation of each mode.
    pub step: f64,
    /// Quadrature half-width in the same units.
    pub extent: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { mc_samples: 1_000_000, seed: 7, broadening: 2.0, step: 0.125, extent: 16.0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    /// Prefactor times the class sum of eigenbasis quadratures.
    pub quadrature: f64,
    pub monte_carlo: Option<f64>,
    pub mc_std_error: Option<f64>,
    pub log_prefactor: f64,
    pub classes: usize,
    pub slab_dim: usize,
}

/// Brute-force evaluation of the partition function on a fixed class window.
///
/// Everything is assembled on the subdivision: the field strength of each
/// class is pushed into `L′` and measured with the Gram matrix of `L′`, the
/// fluctuation operator is `(d′W′)ᵀ M_{L′} (d′W′)` on the coexact slab, the
/// torus zero mode is averaged on a grid from pointwise character values,
/// and the determinants come from Cholesky factorizations.
pub fn partition_oracle(
    model: &CharacterModel,
    action: &ActionSpec,
    observable: &ObservableSpec,
    radius: usize,
    options: OracleOptions,
) -> Result<OracleResult> {
    if !action.is_maxwell() {
        return Err(Error::UnsupportedAction);
    }
    let obs = observable.normalized();
    let (cycle, charge) = match &obs {
        ObservableSpec::Constant => (None, 0),
        ObservableSpec::Wilson { cycle, charge } => (Some(cycle.clone()), *charge),
        ObservableSpec::Custom(_) => return Err(Error::UnsupportedAction),
    };
    let cs = model.triangulation();
    let hc = cs.hodge();
    let fine = cs.fine();
    let p = model.degree();
    let n = cs.dim();
    let g2 = action.coupling;
    let slab = model.coexact_basis();
    let dim = slab.ncols();
    if dim > MAX_ORACLE_DIM {
        return Err(Error::TooLarge { what: alloc::format!("coexact slab of dimension {dim}") });
    }
    let b = model.class_rank();
    let torsion = torsion_elements(model.torsion_orders());
    let window = lattice_window(b, radius);
    let classes = window.len() * torsion.len();
    if classes > MAX_ORACLE_CLASSES {
        return Err(Error::TooLarge { what: alloc::format!("{classes} classes") });
    }

    let torsion_order: u64 = model.torsion_orders().iter().product();
    let mut log_pref = CompensatedSum::new();
    for r in 0..=p {
        let rho = hc.harmonic_integral_basis(r)?;
        let pushed: Vec<Vec<f64>> = rho.iter().map(|x| cs.embed(r, x)).collect();
        let g = gram_matrix(fine, r)?;
        let x = from_columns(fine.count(r), &pushed);
        let mut h = x.transpose() * g * x;
        symmetrize(&mut h);
        let log_det_h = logdet_spd(&h)? - h.nrows() as f64 * (2.0 * PI).ln();
        let sign = if (p - r) % 2 == 0 { 1.0 } else { -1.0 };
        log_pref.add(sign * (0.5 * log_det_h - (torsion_order as f64).ln()));
        log_pref.add(-0.5 * sign * hc.restricted_determinant(r, Subspace::Coexact)?.cholesky_log_det);
    }
    let log_pref = log_pref.value();

    let fine_gram_next = if p < n { gram_matrix(fine, p + 1)? } else { Mat::zeros(0, 0) };
    let mut quad = Mat::zeros(dim, dim);
    if dim > 0 {
        let x = cs.fine_d(p) * cs.embedding(p) * slab;
        quad = x.transpose() * &fine_gram_next * x;
        symmetrize(&mut quad);
    }
    let (lambdas, eigvecs) = if dim > 0 {
        let eig = quad.clone().symmetric_eigen();
        (eig.eigenvalues.iter().copied().collect::<Vec<f64>>(), eig.eigenvectors)
    } else {
        (Vec::new(), Mat::zeros(0, 0))
    };
    if lambdas.iter().any(|&l| l <= 0.0) {
        return Err(Error::NotPositiveDefinite);
    }
    let directions = slab * &eigvecs;
    let linear: Vec<f64> = match &cycle {
        Some(a) => (0..dim)
            .map(|i| {
                let v: Vec<f64> = directions.column(i).iter().copied().collect();
                cs.embed(p, &v).iter().zip(a).map(|(x, &y)| x * y as f64).sum()
            })
            .collect(),
        None => vec![0.0; dim],
    };
    let periods: Vec<f64> = match &cycle {
        Some(a) => model.harmonic_basis().iter().map(|rho| cs.embed(p, rho).iter().zip(a).map(|(x, &y)| x * y as f64).sum()).collect(),
        None => vec![0.0; model.torus_dim()],
    };

    // One-dimensional trapezoid sums in the eigenbasis; spectrally accurate
    // for Gaussians.
    let mut fluct = Complex64::new(1.0, 0.0);
    for (&lam, &ell) in lambdas.iter().zip(&linear) {
        let sigma = (g2 / lam).sqrt();
        let h = options.step * sigma;
        let m = (options.extent / options.step).ceil() as i64;
        let (mut re, mut im) = (CompensatedSum::new(), CompensatedSum::new());
        for k in -m..=m {
            let y = k as f64 * h;
            let w = Complex64::from_polar((-lam * y * y / (2.0 * g2)).exp() * h, 2.0 * PI * charge as f64 * ell * y);
            re.add(w.re);
            im.add(w.im);
        }
        fluct *= Complex64::new(re.value(), im.value());
    }

    let mut quad_sum = CompensatedSum::new();
    let mut fields = Vec::with_capacity(classes);
    for v in &window {
        for t in &torsion {
            let c = ClassCoords { free: v.clone(), torsion: t.clone() };
            let ch = model.delta2_preimage(&c);
            let f = model.delta1(&ch);
            let action_c = if p < n {
                let wf = cs.embed(p + 1, &f);
                inner(&fine_gram_next, &wf, &wf) / (2.0 * g2)
            } else {
                0.0
            };
            let zero_mode = match &cycle {
                Some(a) => wilson_zero_mode(model, &ch, a, charge)?,
                None => Complex64::new(1.0, 0.0),
            };
            quad_sum.add((-action_c).exp() * (zero_mode * fluct).re);
            let phase = match &cycle {
                Some(a) => model.evaluate(&ch, a)?,
                None => 0.0,
            };
            fields.push((f, phase));
        }
    }
    let quadrature = log_pref.exp() * quad_sum.value();

    let (monte_carlo, mc_std_error) = if options.mc_samples == 0 {
        (None, None)
    } else {
        let (mean, se) = monte_carlo(model, &fields, &periods, &quad, &linear, &eigvecs, g2, charge, &options);
        (Some(log_pref.exp() * mean), Some(log_pref.exp() * se))
    };
    Ok(OracleResult { quadrature, monte_carlo, mc_std_error, log_prefactor: log_pref, classes, slab_dim: dim })
}

/// Importance sampling of the summed integrand with a broadened copy of the
/// fluctuation Gaussian, built from a Cholesky factor of the quadratic form.
#[allow(clippy::too_many_arguments)]
fn monte_carlo(
    model: &CharacterModel,
    fields: &[(Vec<f64>, f64)],
    periods: &[f64],
    quad: &Mat,
    linear: &[f64],
    eigvecs: &Mat,
    g2: f64,
    charge: i64,
    options: &OracleOptions,
) -> (f64, f64) {
    let cs = model.triangulation();
    let p = model.degree();
    let dim = quad.nrows();
    let slab = model.coexact_basis();
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let kappa = options.broadening;
    let gram_next = if p < cs.dim() { cs.hodge().gram(p + 1).clone() } else { Mat::zeros(0, 0) };
    let d_slab = if p < cs.dim() { cs.hodge().d(p) * slab } else { Mat::zeros(0, dim) };
    // Wilson phase of τ = slab · y is charge · ℓ(τ); ℓ in slab coordinates.
    let ell_slab: Vec<f64> = if dim > 0 { mat_vec(eigvecs, linear) } else { Vec::new() };
    let chol = if dim > 0 { nalgebra::Cholesky::new(quad.clone()) } else { None };
    let log_det_l = chol.as_ref().map_or(0.0, |c| compensated_sum((0..dim).map(|i| c.l()[(i, i)].ln())));
    let scale = (kappa * g2).sqrt();
    let log_norm = 0.5 * dim as f64 * (2.0 * PI * kappa * g2).ln() - log_det_l;
    let mut acc = CompensatedSum::new();
    let mut acc_sq = CompensatedSum::new();
    for _ in 0..options.mc_samples {
        let x: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        let xsq: f64 = x.iter().map(|v| v * v).sum();
        let y = match &chol {
            Some(c) => {
                let xm = Mat::from_column_slice(dim, 1, &x);
                let sol = c.l().transpose().solve_upper_triangular(&xm).expect("triangular factor");
                sol.column(0).iter().map(|v| v * scale).collect::<Vec<_>>()
            }
            None => Vec::new(),
        };
        let z: Vec<f64> = (0..model.torus_dim()).map(|_| rng.random::<f64>()).collect();
        let dtau = if dim > 0 { mat_vec(&d_slab, &y) } else { vec![0.0; gram_next.nrows()] };
        let ell: f64 = ell_slab.iter().zip(&y).map(|(a, b)| a * b).sum();
        let torus: f64 = z.iter().zip(periods).map(|(a, b)| a * b).sum();
        let mut total = 0.0;
        for (f, phase) in fields {
            let s = if gram_next.nrows() > 0 {
                let w: Vec<f64> = f.iter().zip(&dtau).map(|(a, b)| a + b).collect();
                inner(&gram_next, &w, &w) / (2.0 * g2)
            } else {
                0.0
            };
            let o = (2.0 * PI * charge as f64 * (phase + ell + torus)).cos();
            total += (-s).exp() * o;
        }
        let w = total * (log_norm + 0.5 * xsq).exp();
        acc.add(w);
        acc_sq.add(w * w);
    }
    let nsamp = options.mc_samples as f64;
    let mean = acc.value() / nsamp;
    let var = (acc_sq.value() / nsamp - mean * mean).max(0.0);
    (mean, (var / nsamp).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::CsTriangulation;
    use crate::complex::{fixtures, regular_subdivide, SimplicialComplex};
    use crate::gauge::{partition_function, Truncation};
    use crate::hodge::HodgeOptions;
    use alloc::sync::Arc;

    fn model(x: SimplicialComplex, p: usize) -> CharacterModel {
        let cs = CsTriangulation::perturbed(Arc::new(x), 13, 0.25, HodgeOptions::default()).unwrap();
        CharacterModel::new(Arc::new(cs), p).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn circle_oracle_agrees_with_the_main_path() {
        let m = model(fixtures::cycle(8), 0);
        let a = ActionSpec::maxwell(1.0).unwrap();
        let z = partition_function(&m, &a, &ObservableSpec::Constant, Truncation::default()).unwrap();
        let o = partition_oracle(&m, &a, &ObservableSpec::Constant, z.truncation.radius, OracleOptions::default()).unwrap();
        assert_eq!(o.slab_dim, 7);
        assert!(rel(o.quadrature, z.value) < 1e-6, "{} vs {}", o.quadrature, z.value);
        assert!(rel(o.monte_carlo.unwrap(), z.value) < 0.02, "{:?} vs {}", o.monte_carlo, z.value);
    }

    #[test]
    fn circle_wilson_oracle() {
        let m = model(fixtures::cycle(6), 0);
        let a = ActionSpec::maxwell(0.5).unwrap();
        let mut alpha = vec![0i64; m.triangulation().fine().count(0)];
        alpha[1] = 1;
        alpha[4] = -1;
        let obs = ObservableSpec::Wilson { cycle: alpha, charge: 1 };
        let z = partition_function(&m, &a, &obs, Truncation::default()).unwrap();
        let opts = OracleOptions { mc_samples: 200_000, ..OracleOptions::default() };
        let o = partition_oracle(&m, &a, &obs, z.truncation.radius, opts).unwrap();
        assert!(rel(o.quadrature, z.value) < 1e-6, "{} vs {}", o.quadrature, z.value);
        assert!((o.monte_carlo.unwrap() - z.value).abs() < 5.0 * o.mc_std_error.unwrap() + 1e-3 * z.value);
    }

    #[test]
    fn sphere_monopole_sum_agrees() {
        let base = Arc::new(fixtures::tetrahedron_boundary());
        let m = model(regular_subdivide(&base).unwrap().detached(), 1);
        let a = ActionSpec::maxwell(1.0).unwrap();
        let z = partition_function(&m, &a, &ObservableSpec::Constant, Truncation::default()).unwrap();
        assert_eq!(z.prefactor_breakdown[0].torsion_order, 1);
        let o = partition_oracle(
            &m,
            &a,
            &ObservableSpec::Constant,
            z.truncation.radius,
            OracleOptions { mc_samples: 0, ..OracleOptions::default() },
        )
        .unwrap();
        assert_eq!(o.slab_dim, 15);
        assert!(rel(o.quadrature, z.value) < 1e-8, "{} vs {}", o.quadrature, z.value);
    }

    #[test]
    fn empty_slab_is_prefactor_times_class_count() {
        let m = model(fixtures::cycle(5), 1);
        let a = ActionSpec::maxwell(1.0).unwrap();
        let z = partition_function(&m, &a, &ObservableSpec::Constant, Truncation::default()).unwrap();
        let o =
            partition_oracle(&m, &a, &ObservableSpec::Constant, 0, OracleOptions { mc_samples: 10, ..OracleOptions::default() }).unwrap();
        assert_eq!((z.slab_dim, z.class_sum), (0, 1.0));
        assert!(rel(z.value, z.log_prefactor.exp()) < 1e-15);
        assert!(rel(o.quadrature, z.value) < 1e-12);
        assert!(rel(o.monte_carlo.unwrap(), z.value) < 1e-12);
    }

    #[test]
    fn weak_coupling_limit_counts_lattice_points() {
        let m = model(fixtures::cycle(4), 0);
        let h = m.triangulation().hodge().h_matrix(1).unwrap()[(0, 0)];
        let (mut last_main, mut last_oracle) = (f64::INFINITY, 0.0);
        for g2 in [1.0, 10.0, 100.0, 1000.0] {
            let a = ActionSpec::maxwell(g2).unwrap();
            let z = partition_function(&m, &a, &ObservableSpec::Constant, Truncation::default()).unwrap();
            let o = partition_oracle(&m, &a, &ObservableSpec::Constant, 3, OracleOptions { mc_samples: 0, ..OracleOptions::default() })
                .unwrap();
            let oracle_ratio = o.quadrature / (z.log_prefactor + z.log_gaussian).exp() / 7.0;
            let main_ratio = z.class_sum * (h / (2.0 * PI * g2)).sqrt();
            // Poisson summation: the theta sum approaches the Gaussian volume from above.
            assert!(oracle_ratio > last_oracle && main_ratio <= last_main + 1e-12 && main_ratio >= 1.0 - 1e-12);
            last_main = main_ratio;
            last_oracle = oracle_ratio;
        }
        assert!(last_oracle > 0.99 && (last_main - 1.0).abs() < 1e-9);
    }

    #[test]
    fn oversized_problems_are_refused() {
        let m = model(fixtures::cycle(40), 0);
        let a = ActionSpec::maxwell(1.0).unwrap();
        assert!(matches!(partition_oracle(&m, &a, &ObservableSpec::Constant, 2, OracleOptions::default()), Err(Error::TooLarge { .. })));
        let m = model(fixtures::cycle(4), 0);
        assert!(matches!(partition_oracle(&m, &a, &ObservableSpec::Constant, 600, OracleOptions::default()), Err(Error::TooLarge { .. })));
    }
}
