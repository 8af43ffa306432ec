//! Combinatorial Hodge theory for the Whitney inner product: adjoints,
//! Laplacians, the harmonic/exact/coexact splitting, harmonic bases with
//! integral periods, and determinants of Laplacians on invariant subspaces.
//!
//! All operators act on cochains of the base complex `L`; the Gram matrix of
//! `E^k(L, L′)` equals the Whitney Gram matrix of `L` pulled back through `W′`,
//! so nothing here needs the subdivision.

mod det;

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::complex::SimplicialComplex;
use crate::exact::Topology;
use crate::linalg::{cholesky_solve, gen_eigh, gen_eigvals, lstsq_min_norm, rank_mod_p, symmetrize, GenEigen, Mat};
use crate::whitney::gram_matrix;
use crate::{Error, Result};

pub use det::{log_det_from_spectrum, zeta, zeta_log_det, RestrictedDet, Subspace};

/// Numerical settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HodgeOptions {
    /// Eigenvalues below `kernel_threshold · λ_max` count as zero.
    pub kernel_threshold: f64,
}

impl Default for HodgeOptions {
    fn default() -> Self {
        Self { kernel_threshold: 1e-12 }
    }
}

/// Eigenvalues of a semidefinite pencil, split into kernel and the rest.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    /// All eigenvalues, ascending.
    pub values: Vec<f64>,
    /// Number of eigenvalues classified as zero.
    pub kernel_dim: usize,
}

impl Spectrum {
    pub fn nonzero(&self) -> &[f64] {
        &self.values[self.kernel_dim..]
    }
}

/// Gram matrices, coboundaries and topology of one complex.
#[derive(Clone, Debug)]
pub struct HodgeComplex {
    complex: Arc<SimplicialComplex>,
    topology: Topology,
    grams: Vec<Mat>,
    d: Vec<Mat>,
    ranks: Vec<usize>,
    options: HodgeOptions,
}

fn dense_coboundary(x: &SimplicialComplex, k: usize) -> Mat {
    x.coboundary(k).to_f64().to_dense()
}

impl HodgeComplex {
    pub fn new(complex: Arc<SimplicialComplex>, topology: Topology, options: HodgeOptions) -> Result<Self> {
        if topology.f_vector() != complex.f_vector().as_slice() {
            return Err(Error::InvalidInput("topology belongs to a different complex".into()));
        }
        let n = complex.dim();
        let grams = (0..=n).map(|k| gram_matrix(&complex, k)).collect::<Result<Vec<_>>>()?;
        let d = (0..=n).map(|k| dense_coboundary(&complex, k)).collect();
        let ranks = (0..=n).map(|k| if k < n { rank_mod_p(complex.boundary(k + 1).expect("k + 1 ≤ n")) } else { 0 }).collect();
        Ok(Self { complex, topology, grams, d, ranks, options })
    }

    /// Computes the topology by Smith normal form first.
    pub fn with_computed_topology(complex: Arc<SimplicialComplex>, options: HodgeOptions) -> Result<Self> {
        let t = Topology::compute(&complex)?;
        Self::new(complex, t, options)
    }

    pub fn complex(&self) -> &Arc<SimplicialComplex> {
        &self.complex
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn options(&self) -> HodgeOptions {
        self.options
    }

    pub fn dim(&self) -> usize {
        self.complex.dim()
    }

    fn check(&self, p: usize) -> Result<()> {
        if p > self.dim() {
            return Err(Error::DegreeOutOfRange { degree: p, max: self.dim() });
        }
        Ok(())
    }

    pub fn gram(&self, p: usize) -> &Mat {
        &self.grams[p]
    }

    /// Coboundary `d_p : C^p → C^{p+1}` (zero rows in the top degree).
    pub fn d(&self, p: usize) -> &Mat {
        &self.d[p]
    }

    /// Exact rank of `d_p`.
    pub fn rank_d(&self, p: usize) -> usize {
        self.ranks[p]
    }

    /// `d_pᵀ M_{p+1} d_p`, the form of `δd`.
    pub fn up_form(&self, p: usize) -> Mat {
        if p == self.dim() {
            return Mat::zeros(self.complex.count(p), self.complex.count(p));
        }
        let d = &self.d[p];
        let mut a = d.transpose() * &self.grams[p + 1] * d;
        symmetrize(&mut a);
        a
    }

    /// `M_p d_{p−1} M_{p−1}⁻¹ d_{p−1}ᵀ M_p`, the form of `dδ`.
    pub fn down_form(&self, p: usize) -> Result<Mat> {
        if p == 0 {
            return Ok(Mat::zeros(self.complex.count(0), self.complex.count(0)));
        }
        let md = &self.grams[p] * &self.d[p - 1];
        let x = cholesky_solve(&self.grams[p - 1], &md.transpose()).map_err(|_| Error::SingularGram { degree: p - 1 })?;
        let mut a = &md * x;
        symmetrize(&mut a);
        Ok(a)
    }

    fn split(&self, values: Vec<f64>, rank: usize, node: &str) -> Result<Spectrum> {
        let n = values.len();
        let kernel_dim = n - rank;
        let lmax = values.last().copied().unwrap_or(0.0).abs();
        let cut = self.options.kernel_threshold * lmax;
        let by_threshold = values.iter().filter(|v| v.abs() <= cut).count();
        if by_threshold != kernel_dim {
            return Err(Error::ExactnessViolation {
                node: alloc::format!("{node}: {by_threshold} eigenvalues under the kernel threshold, expected {kernel_dim}"),
            });
        }
        Ok(Spectrum { values, kernel_dim })
    }

    /// Spectrum of `δ_{p+1} d_p` on `C^p`; the nonzero part is the spectrum
    /// of `Δ_p` on `im δ_{p+1}`.
    pub fn up_spectrum(&self, p: usize) -> Result<Spectrum> {
        self.check(p)?;
        let v = gen_eigvals(&self.up_form(p), &self.grams[p]).map_err(|_| Error::SingularGram { degree: p })?;
        self.split(v, self.ranks[p], "up spectrum")
    }

    /// Spectrum of `d_{p−1} δ_p` on `C^p`; the nonzero part is the spectrum
    /// of `Δ_p` on `im d_{p−1}`.
    pub fn down_spectrum(&self, p: usize) -> Result<Spectrum> {
        self.check(p)?;
        let v = gen_eigvals(&self.down_form(p)?, &self.grams[p]).map_err(|_| Error::SingularGram { degree: p })?;
        self.split(v, if p == 0 { 0 } else { self.ranks[p - 1] }, "down spectrum")
    }

    /// Harmonic representatives `ρ_j = u_j − d x_j` of the integral cocycles
    /// `u_j`, with `x_j` minimizing `‖u_j − d x_j‖` in the Whitney norm.
    pub fn harmonic_integral_basis(&self, p: usize) -> Result<Vec<Vec<f64>>> {
        self.check(p)?;
        let deg = self.topology.degree(p)?;
        if deg.betti == 0 {
            return Ok(Vec::new());
        }
        let u = Mat::from_fn(self.complex.count(p), deg.betti, |r, c| deg.cocycles[c][r] as f64);
        if p == 0 {
            return Ok((0..deg.betti).map(|j| u.column(j).iter().copied().collect()).collect());
        }
        let chol = nalgebra::Cholesky::new(self.grams[p].clone()).ok_or(Error::SingularGram { degree: p })?;
        let lt = chol.l().transpose();
        let a = &lt * &self.d[p - 1];
        let b = &lt * &u;
        let x = lstsq_min_norm(&a, &b, 1e-12);
        let rho = u - &self.d[p - 1] * x;
        Ok((0..deg.betti).map(|j| rho.column(j).iter().copied().collect()).collect())
    }

    /// `h_{jk} = ⟨ρ_j, ρ_k⟩`.
    pub fn h_matrix(&self, p: usize) -> Result<Mat> {
        let rho = self.harmonic_integral_basis(p)?;
        Ok(gram_of(&self.grams[p], &rho))
    }

    /// Full frame with eigenvectors and projectors.
    pub fn frame(&self, p: usize) -> Result<HodgeFrame> {
        build_frame(self, p)
    }

    /// Determinant of `Δ_p` on an invariant subspace, by three independent
    /// routes.
    pub fn restricted_determinant(&self, p: usize, subspace: Subspace) -> Result<RestrictedDet> {
        det::restricted_determinant(self, p, subspace)
    }

    /// Largest relative mismatch between the nonzero spectra of `dδ` on
    /// degree `p` and `δd` on degree `p − 1`.
    pub fn supersymmetry_residual(&self, p: usize) -> Result<f64> {
        if p == 0 {
            return Ok(0.0);
        }
        let a = self.down_spectrum(p)?;
        let b = self.up_spectrum(p - 1)?;
        let (a, b) = (a.nonzero(), b.nonzero());
        if a.len() != b.len() {
            return Err(Error::ExactnessViolation { node: alloc::format!("supersymmetric pair ({}, {p})", p - 1) });
        }
        Ok(a.iter().zip(b).map(|(x, y)| (x - y).abs() / x.abs().max(y.abs())).fold(0.0, f64::max))
    }

    /// Spectral data for reporting.
    pub fn spectral_summary(&self, p: usize) -> Result<SpectralSummary> {
        let h = self.h_matrix(p)?;
        Ok(SpectralSummary {
            degree: p,
            betti: self.topology.degree(p)?.betti,
            up: self.up_spectrum(p)?.values,
            down: self.down_spectrum(p)?.values,
            h_matrix: (0..h.nrows()).map(|r| h.row(r).iter().copied().collect()).collect(),
        })
    }
}

/// Eigenvalues and harmonic Gram matrix of one degree.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralSummary {
    pub degree: usize,
    pub betti: usize,
    pub up: Vec<f64>,
    pub down: Vec<f64>,
    pub h_matrix: Vec<Vec<f64>>,
}

pub(crate) fn gram_of(m: &Mat, vs: &[Vec<f64>]) -> Mat {
    Mat::from_fn(vs.len(), vs.len(), |i, j| crate::linalg::inner(m, &vs[i], &vs[j]))
}

/// Operators of one degree together with the orthogonal splitting
/// `C^p = ℋ^p ⊕ im d_{p−1} ⊕ im δ_{p+1}`.
#[derive(Clone, Debug)]
pub struct HodgeFrame {
    pub degree: usize,
    pub gram: Mat,
    /// `d_p`.
    pub d: Mat,
    /// `d_{p−1}` (`n_p × 0` when `p = 0`).
    pub d_prev: Mat,
    /// `δ_p = M_{p−1}⁻¹ d_{p−1}ᵀ M_p`.
    pub delta: Mat,
    /// `δ_{p+1} = M_p⁻¹ d_pᵀ M_{p+1}`.
    pub delta_next: Mat,
    /// `Δ_p = d_{p−1} δ_p + δ_{p+1} d_p`.
    pub laplacian: Mat,
    /// Eigenpairs of `Δ_p` as a pencil against the Gram matrix.
    pub eigen: GenEigen,
    /// `M`-orthonormal columns spanning `ℋ^p`.
    pub harmonic_basis: Mat,
    /// `M`-orthonormal columns spanning `im d_{p−1}`.
    pub exact_basis: Mat,
    /// `M`-orthonormal columns spanning `im δ_{p+1}`.
    pub coexact_basis: Mat,
    pub harmonic_integral_basis: Vec<Vec<f64>>,
    pub h_matrix: Mat,
}

fn columns_where(e: &GenEigen, keep: impl Fn(f64) -> bool) -> Mat {
    let idx: Vec<usize> = (0..e.values.len()).filter(|&i| keep(e.values[i])).collect();
    Mat::from_fn(e.vectors.nrows(), idx.len(), |r, c| e.vectors[(r, idx[c])])
}

/// Builds the full frame of degree `p`.
pub fn build_frame(hc: &HodgeComplex, p: usize) -> Result<HodgeFrame> {
    hc.check(p)?;
    let x = &hc.complex;
    let m = hc.grams[p].clone();
    let np = x.count(p);
    let d = hc.d[p].clone();
    let (d_prev, delta) = if p == 0 {
        (Mat::zeros(np, 0), Mat::zeros(0, np))
    } else {
        let dp = hc.d[p - 1].clone();
        let delta = cholesky_solve(&hc.grams[p - 1], &(dp.transpose() * &m)).map_err(|_| Error::SingularGram { degree: p - 1 })?;
        (dp, delta)
    };
    let delta_next = if p == hc.dim() {
        Mat::zeros(np, 0)
    } else {
        cholesky_solve(&m, &(d.transpose() * &hc.grams[p + 1])).map_err(|_| Error::SingularGram { degree: p })?
    };
    let up = hc.up_form(p);
    let down = hc.down_form(p)?;
    let laplacian = if p == hc.dim() { &d_prev * &delta } else { &d_prev * &delta + &delta_next * &d };
    let total = &up + &down;
    let eigen = gen_eigh(&total, &m).map_err(|_| Error::SingularGram { degree: p })?;
    let up_e = gen_eigh(&up, &m).map_err(|_| Error::SingularGram { degree: p })?;
    let down_e = gen_eigh(&down, &m).map_err(|_| Error::SingularGram { degree: p })?;
    let thr = hc.options.kernel_threshold;
    let cut = |e: &GenEigen| thr * e.values.last().copied().unwrap_or(0.0).abs();
    let (c_all, c_up, c_down) = (cut(&eigen), cut(&up_e), cut(&down_e));
    let harmonic_basis = columns_where(&eigen, |v| v.abs() <= c_all);
    let coexact_basis = columns_where(&up_e, |v| v.abs() > c_up);
    let exact_basis = columns_where(&down_e, |v| v.abs() > c_down);
    let betti = hc.topology.degree(p)?.betti;
    if harmonic_basis.ncols() != betti {
        return Err(Error::ExactnessViolation { node: alloc::format!("dim ℋ^{p} = {} but b_{p} = {betti}", harmonic_basis.ncols()) });
    }
    if coexact_basis.ncols() != hc.ranks[p] || exact_basis.ncols() != if p == 0 { 0 } else { hc.ranks[p - 1] } {
        return Err(Error::ExactnessViolation { node: alloc::format!("rank split of degree {p}") });
    }
    let rho = hc.harmonic_integral_basis(p)?;
    let h_matrix = gram_of(&m, &rho);
    Ok(HodgeFrame {
        degree: p,
        gram: m,
        d,
        d_prev,
        delta,
        delta_next,
        laplacian,
        eigen,
        harmonic_basis,
        exact_basis,
        coexact_basis,
        harmonic_integral_basis: rho,
        h_matrix,
    })
}

impl HodgeFrame {
    fn projector(&self, basis: &Mat) -> Mat {
        basis * basis.transpose() * &self.gram
    }

    pub fn harmonic_projector(&self) -> Mat {
        self.projector(&self.harmonic_basis)
    }

    pub fn exact_projector(&self) -> Mat {
        self.projector(&self.exact_basis)
    }

    pub fn coexact_projector(&self) -> Mat {
        self.projector(&self.coexact_basis)
    }

    /// `(harmonic, exact, coexact)` parts of `x`.
    pub fn decompose(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let v = nalgebra::DVector::from_column_slice(x);
        let mv = &self.gram * &v;
        let part = |b: &Mat| -> Vec<f64> { (b * (b.transpose() * &mv)).iter().copied().collect() };
        (part(&self.harmonic_basis), part(&self.exact_basis), part(&self.coexact_basis))
    }

    /// Largest entry of `M Δ − (M Δ)ᵀ`, relative to the largest entry of `M Δ`.
    pub fn self_adjointness_residual(&self) -> f64 {
        let a = &self.gram * &self.laplacian;
        let scale = a.abs().max().max(f64::MIN_POSITIVE);
        (&a - a.transpose()).abs().max() / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{fixtures, perturbed_subdivide};
    use crate::linalg::max_abs;
    use crate::whitney::embedding_matrix;
    use alloc::vec;
    use core::f64::consts::PI;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn hc(x: SimplicialComplex) -> HodgeComplex {
        HodgeComplex::with_computed_topology(Arc::new(x), HodgeOptions::default()).unwrap()
    }

    /// Generalized eigenvalues of the circulant pencil of a regular `n`-gon
    /// with edge length `h`: stiffness `(2 − 2cos θ)/h`, mass `h(4 + 2cos θ)/6`.
    fn cycle_spectrum(n: usize) -> Vec<f64> {
        let h = 2.0 * (PI / n as f64).sin() / (2.0 * PI);
        let mut v: Vec<f64> = (0..n)
            .map(|j| {
                let c = (2.0 * PI * j as f64 / n as f64).cos();
                ((2.0 - 2.0 * c) / h) / (h * (4.0 + 2.0 * c) / 6.0)
            })
            .collect();
        v.sort_by(f64::total_cmp);
        v
    }

    #[test]
    fn cycle_laplacian_matches_circulant_oracle() {
        for n in [3, 8, 13] {
            let h = hc(fixtures::cycle(n));
            let s = h.up_spectrum(0).unwrap();
            assert_eq!(s.kernel_dim, 1);
            for (a, b) in s.values.iter().zip(cycle_spectrum(n)) {
                assert!((a - b).abs() <= 1e-9 * b.max(1.0), "{a} vs {b}");
            }
            let f = h.frame(0).unwrap();
            assert_eq!(f.harmonic_basis.ncols(), 1);
        }
    }

    #[test]
    fn harmonic_dimensions_match_betti_numbers() {
        let t = hc(fixtures::torus7());
        assert_eq!(t.frame(1).unwrap().harmonic_basis.ncols(), 2);
        let s = hc(fixtures::tetrahedron_boundary());
        let f = s.frame(1).unwrap();
        assert_eq!(f.harmonic_basis.ncols(), 0);
        assert!(f.eigen.values[0] > 0.0);
        assert!(s.harmonic_integral_basis(1).unwrap().is_empty());
        assert_eq!(s.h_matrix(1).unwrap().nrows(), 0);
    }

    #[test]
    fn decomposition_projectors_sum_to_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for x in [fixtures::cycle(7), fixtures::torus7(), fixtures::tetrahedron_boundary()] {
            let h = hc(x);
            for p in 0..=h.dim() {
                let f = h.frame(p).unwrap();
                let n = f.gram.nrows();
                let sum = f.harmonic_projector() + f.exact_projector() + f.coexact_projector();
                assert!(max_abs(&(sum - Mat::identity(n, n))) < 1e-9);
                for _ in 0..50 {
                    let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
                    let (a, b, c) = f.decompose(&v);
                    let ip = |x: &[f64], y: &[f64]| crate::linalg::inner(&f.gram, x, y);
                    assert!(ip(&a, &b).abs() < 1e-9 && ip(&a, &c).abs() < 1e-9 && ip(&b, &c).abs() < 1e-9);
                }
                assert!(f.self_adjointness_residual() < 1e-10);
            }
        }
    }

    #[test]
    fn harmonic_integral_basis_keeps_integer_periods() {
        let h = hc(fixtures::torus7());
        let rho = h.harmonic_integral_basis(1).unwrap();
        let z = &h.topology().degree(1).unwrap().cycles;
        for (j, r) in rho.iter().enumerate() {
            for (l, c) in z.iter().enumerate() {
                let per: f64 = r.iter().zip(c).map(|(a, &b)| a * b as f64).sum();
                assert!((per - if j == l { 1.0 } else { 0.0 }).abs() < 1e-8);
            }
        }
        let f = h.frame(1).unwrap();
        for r in &rho {
            let (_, e, c) = f.decompose(r);
            assert!(e.iter().chain(&c).all(|v| v.abs() < 1e-9));
        }
        let circle = hc(fixtures::cycle(6));
        let hm = circle.h_matrix(1).unwrap();
        // The harmonic 1-form of period 1 on a circle of length ℓ has norm² 1/ℓ.
        let len: f64 = (0..6).map(|i| circle.complex().edge_length(i)).sum();
        assert!((hm[(0, 0)] - 1.0 / len).abs() < 1e-12);
    }

    #[test]
    fn supersymmetric_spectra_agree() {
        for x in [fixtures::torus7(), fixtures::tetrahedron_boundary(), fixtures::cycle(9)] {
            let h = hc(x);
            for p in 1..=h.dim() {
                assert!(h.supersymmetry_residual(p).unwrap() < 1e-8);
            }
        }
    }

    #[test]
    fn spectra_agree_in_both_presentations() {
        let base = Arc::new(fixtures::torus7());
        let child = perturbed_subdivide(&base, 12, 0.3).unwrap();
        let h = HodgeComplex::with_computed_topology(base.clone(), HodgeOptions::default()).unwrap();
        let pull = |k: usize| {
            let w = embedding_matrix(&child, k).unwrap().to_dense();
            w.transpose() * crate::whitney::gram_matrix(&child, k).unwrap() * w
        };
        let d = h.d(0);
        let mut up = d.transpose() * pull(1) * d;
        symmetrize(&mut up);
        let mut m0 = pull(0);
        symmetrize(&mut m0);
        let fine = gen_eigvals(&up, &m0).unwrap();
        let coarse = h.up_spectrum(0).unwrap().values;
        for (a, b) in fine.iter().zip(&coarse) {
            assert!((a - b).abs() < 1e-9 * b.abs().max(1.0));
        }
    }

    #[test]
    fn degree_out_of_range() {
        let h = hc(fixtures::cycle(4));
        assert!(matches!(h.up_spectrum(2), Err(Error::DegreeOutOfRange { .. })));
        let _ = vec![0];
    }
}
