use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::theta::{lattice_window, theta_with_characteristic, times_i};
use super::{complex_zero_mode, ActionSpec, ObservableSpec};
use crate::characters::{CharacterCoords, CharacterModel};
use crate::exact::ClassCoords;
use crate::hodge::{log_det_from_spectrum, HodgeComplex, Subspace};
use crate::linalg::{compensated_sum, logdet_spd, mat_vec, symmetrize, Mat};
use crate::{Error, Result};

/// Truncation of the free part of the class sum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Truncation {
    /// Starting `∞`-radius of the lattice window; grown as needed.
    pub radius: usize,
    /// Bound on the neglected part of the class sum.
    pub tolerance: f64,
}

impl Default for Truncation {
    fn default() -> Self {
        Self { radius: 8, tolerance: 1e-12 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TruncationReport {
    pub radius: usize,
    pub tail_bound: f64,
    pub tolerance: f64,
    /// Lattice points summed, torsion elements included.
    pub terms: usize,
}

/// One factor `r` of the determinant prefactor.
#[derive(Clone, Debug, PartialEq)]
pub struct PrefactorTerm {
    pub degree: usize,
    /// `(−1)^{p−r}`.
    pub exponent: i32,
    pub betti: usize,
    /// `log det(h^{(r)} / 2π)`.
    pub log_det_h: f64,
    /// `|H^{p+1}(M; ℤ)_tor|`.
    pub torsion_order: u64,
    /// Dimension of `im δ_{r+1}` in degree `r`.
    pub laplacian_dim: usize,
    /// `log det Δ_r` on `im δ_{r+1}`.
    pub log_det_laplacian: f64,
    /// `½(−1)^{p+1−r}`.
    pub laplacian_exponent: f64,
}

impl PrefactorTerm {
    pub fn log_value(&self) -> f64 {
        self.exponent as f64 * (0.5 * self.log_det_h - (self.torsion_order as f64).ln()) + self.laplacian_exponent * self.log_det_laplacian
    }
}

/// `∫_{im δ} [e^{−S} O]₀ dτ` for one class, in the log domain.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianIntegral {
    pub dimension: usize,
    pub log_abs: f64,
    /// `−1`, `0` or `1`.
    pub sign: f64,
    /// Standard error when the value comes from sampling.
    pub std_error: Option<f64>,
}

impl GaussianIntegral {
    pub fn value(&self) -> f64 {
        if self.sign == 0.0 {
            0.0
        } else {
            self.sign * self.log_abs.exp()
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassTerm {
    pub free: Vec<i64>,
    pub torsion: Vec<u64>,
    /// `e^{−⟨F_c, F_c⟩/2g²}` times the real phase of the observable.
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PartitionResult {
    pub degree: usize,
    pub coupling: f64,
    pub observable: String,
    pub value: f64,
    pub log_abs: f64,
    pub sign: f64,
    pub log_prefactor: f64,
    pub prefactor_breakdown: Vec<PrefactorTerm>,
    /// `log` of the fluctuation integral at `c = 0` without the class
    /// weight or the observable phase.
    pub log_gaussian: f64,
    pub slab_dim: usize,
    pub class_sum: f64,
    pub class_sum_terms: Vec<ClassTerm>,
    pub truncation: TruncationReport,
    pub oracle_value: Option<f64>,
}

/// Eigenvalues of `δd` on `im δ_{p+1}` with `M`-orthonormal eigenvectors.
pub(super) fn slab_eigen(model: &CharacterModel) -> (Vec<f64>, Mat) {
    slab_eigen_of(model.triangulation().hodge(), model.degree(), model.coexact_basis())
}

fn slab_eigen_of(hc: &HodgeComplex, p: usize, b: &Mat) -> (Vec<f64>, Mat) {
    if b.ncols() == 0 {
        return (Vec::new(), Mat::zeros(b.nrows(), 0));
    }
    let mut q = b.transpose() * hc.up_form(p) * b;
    symmetrize(&mut q);
    let size = q.nrows();
    let eig = q.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let u = Mat::from_fn(size, order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, b * u)
}

fn dot_i(a: &[f64], b: &[i64]) -> f64 {
    a.iter().zip(b).map(|(x, &y)| x * y as f64).sum()
}

/// Wilson data: whether the torus zero mode survives, and `ℓ_i = (W′v_i)(α)`.
pub(super) struct WilsonData {
    pub charge: i64,
    pub cycle: Vec<i64>,
    pub survives: bool,
    pub linear: Vec<f64>,
}

pub(super) fn wilson_data(model: &CharacterModel, observable: &ObservableSpec, vectors: &Mat) -> Result<Option<WilsonData>> {
    let ObservableSpec::Wilson { cycle, charge } = observable else { return Ok(None) };
    let cs = model.triangulation();
    let p = model.degree();
    model.evaluate(&model.zero(), cycle)?;
    let survives = model.harmonic_basis().iter().all(|rho| {
        let period = dot_i(&cs.embed(p, rho), cycle).round() as i64;
        charge * period == 0
    });
    let linear = (0..vectors.ncols()).map(|i| dot_i(&cs.embed(p, &vectors.column(i).iter().copied().collect::<Vec<_>>()), cycle)).collect();
    Ok(Some(WilsonData { charge: *charge, cycle: cycle.clone(), survives, linear }))
}

fn class_character(model: &CharacterModel, c: &ClassCoords) -> CharacterCoords {
    model.delta2_preimage(c)
}

fn check_kinds(action: &ActionSpec, observable: &ObservableSpec) -> Result<ObservableSpec> {
    if !action.is_maxwell() {
        return Err(Error::UnsupportedAction);
    }
    let obs = observable.normalized();
    if matches!(obs, ObservableSpec::Custom(_)) {
        return Err(Error::UnsupportedAction);
    }
    Ok(obs)
}

const MC_SAMPLES: usize = 200_000;
const MC_SEED: u64 = 0x5eed_0bad_cafe;

fn numeric_integral(action: &ActionSpec, observable: &ObservableSpec, model: &CharacterModel, c: &ClassCoords) -> Result<GaussianIntegral> {
    let (values, vectors) = slab_eigen(model);
    let dim = values.len();
    let base = class_character(model, c);
    let integrand = |z: &[f64], tau: Vec<f64>| -> Result<f64> {
        let ch = CharacterCoords { z: z.to_vec(), tau, ..base.clone() };
        Ok((-action.evaluate(model, &ch)).exp() * observable.evaluate(model, &ch)?)
    };
    if dim == 0 {
        let mut err = None;
        let zm = super::fourier_zero_mode(
            model.torus_dim(),
            |z| {
                integrand(z, base.tau.clone()).unwrap_or_else(|e| {
                    err = Some(e);
                    0.0
                })
            },
            4,
            256,
            1e-10,
        )?;
        if let Some(e) = err {
            return Err(e);
        }
        return Ok(signed_log(zm.value, 0, None));
    }
    let g2 = action.coupling;
    let kappa = 2.0;
    let mut rng = ChaCha8Rng::seed_from_u64(MC_SEED);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let log_norm = 0.5 * dim as f64 * (2.0 * PI * kappa * g2).ln() - 0.5 * compensated_sum(values.iter().map(|l| l.ln()));
    for _ in 0..MC_SAMPLES {
        let mut y = vec![0.0; dim];
        let mut xsq = 0.0;
        for (i, yi) in y.iter_mut().enumerate() {
            let x: f64 = StandardNormal.sample(&mut rng);
            xsq += x * x;
            *yi = x * (kappa * g2 / values[i]).sqrt();
        }
        let z: Vec<f64> = (0..model.torus_dim()).map(|_| rand::Rng::random::<f64>(&mut rng)).collect();
        let w = integrand(&z, mat_vec(&vectors, &y))? * (log_norm + 0.5 * xsq).exp();
        sum += w;
        sum_sq += w * w;
    }
    let n = MC_SAMPLES as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0);
    Ok(signed_log(mean, dim, Some((var / n).sqrt())))
}

fn signed_log(v: f64, dimension: usize, std_error: Option<f64>) -> GaussianIntegral {
    GaussianIntegral { dimension, log_abs: v.abs().ln(), sign: if v == 0.0 { 0.0 } else { v.signum() }, std_error }
}

/// `∫_{im δ_{p+1}} [e^{−S} O]₀ dτ` with the background character of class `c`.
///
/// For the Maxwell action with a constant or Wilson observable this is the
/// closed form `e^{−S(F_c)} (2πg²)^{D/2} det(Δ_p|_{im δ})^{−1/2}`, times
/// `e^{−2π²q²g² Σ ℓ_i²/λ_i} cos(2πq T_c(α))` for a Wilson loop whose torus
/// zero mode survives. Other kinds fall back to importance sampling.
pub fn gaussian_integral_im_delta(
    action: &ActionSpec,
    observable: &ObservableSpec,
    model: &CharacterModel,
    c: &ClassCoords,
) -> Result<GaussianIntegral> {
    let obs = observable.normalized();
    if !action.is_maxwell() || matches!(obs, ObservableSpec::Custom(_)) {
        return numeric_integral(action, &obs, model, c);
    }
    let (values, vectors) = slab_eigen(model);
    let g2 = action.coupling;
    let ch = class_character(model, c);
    let mut log_abs = 0.5 * values.len() as f64 * (2.0 * PI * g2).ln()
        - 0.5 * compensated_sum(values.iter().map(|l| l.ln()))
        - action.evaluate(model, &ch);
    let mut sign = 1.0;
    if let Some(w) = wilson_data(model, &obs, &vectors)? {
        if !w.survives {
            return Ok(GaussianIntegral { dimension: values.len(), log_abs: f64::NEG_INFINITY, sign: 0.0, std_error: None });
        }
        let q = w.charge as f64;
        log_abs -= 2.0 * PI * PI * q * q * g2 * compensated_sum(w.linear.iter().zip(&values).map(|(l, lam)| l * l / lam));
        let phase = (2.0 * PI * q * model.evaluate(&ch, &w.cycle)?).cos();
        log_abs += phase.abs().ln();
        sign = if phase == 0.0 { 0.0 } else { phase.signum() };
    }
    Ok(GaussianIntegral { dimension: values.len(), log_abs, sign, std_error: None })
}

/// `log` of the determinant prefactor and its per-degree factors.
pub fn log_prefactor(hc: &HodgeComplex, p: usize) -> Result<(f64, Vec<PrefactorTerm>)> {
    let n = hc.dim();
    if p > n {
        return Err(Error::DegreeOutOfRange { degree: p, max: n });
    }
    let torsion_order: u64 = if p < n { hc.topology().degree(p + 1)?.torsion.iter().product() } else { 1 };
    let mut terms = Vec::with_capacity(p + 1);
    for r in 0..=p {
        let h = hc.h_matrix(r)?;
        let log_det_h = logdet_spd(&h)? - h.nrows() as f64 * (2.0 * PI).ln();
        let coexact = hc.up_spectrum(r)?;
        let sign = if (p - r) % 2 == 0 { 1 } else { -1 };
        terms.push(PrefactorTerm {
            degree: r,
            exponent: sign,
            betti: h.nrows(),
            log_det_h,
            torsion_order,
            laplacian_dim: coexact.nonzero().len(),
            log_det_laplacian: log_det_from_spectrum(coexact.nonzero()),
            laplacian_exponent: -0.5 * sign as f64,
        });
    }
    Ok((compensated_sum(terms.iter().map(PrefactorTerm::log_value)), terms))
}

/// Relative difference between the alternating determinant product taken
/// over `im δ_{r+1}` in degree `r` and over `im d_r` in degree `r + 1`.
pub fn telescoping_residual(hc: &HodgeComplex, p: usize) -> Result<f64> {
    let n = hc.dim();
    let mut coexact = Vec::new();
    let mut exact = Vec::new();
    for r in 0..=p.min(n) {
        let e = if (p + 1 - r) % 2 == 0 { 0.5 } else { -0.5 };
        coexact.push(e * hc.restricted_determinant(r, Subspace::Coexact)?.log_det);
        if r < n {
            exact.push(e * hc.restricted_determinant(r + 1, Subspace::Exact)?.log_det);
        }
    }
    let a = compensated_sum(coexact);
    let b = compensated_sum(exact);
    Ok((a - b).abs() / a.abs().max(1.0))
}

pub(super) fn torsion_elements(orders: &[u64]) -> Vec<Vec<u64>> {
    let mut out = vec![vec![0u64; orders.len()]];
    for (i, &m) in orders.iter().enumerate() {
        let mut next = Vec::with_capacity(out.len() * m as usize);
        for t in &out {
            for v in 0..m {
                let mut t = t.clone();
                t[i] = v;
                next.push(t);
            }
        }
        out = next;
    }
    out
}

const MAX_STORED_TERMS: usize = 10_000;

/// The partition function `𝒵^{(p)}_{K,K′}(O)`.
pub fn partition_function(
    model: &CharacterModel,
    action: &ActionSpec,
    observable: &ObservableSpec,
    truncation: Truncation,
) -> Result<PartitionResult> {
    let obs = check_kinds(action, observable)?;
    let (values, vectors) = slab_eigen(model);
    let wilson = wilson_data(model, &obs, &vectors)?;
    let phase_of = |c: &ClassCoords| -> Result<f64> {
        match &wilson {
            Some(w) => model.evaluate(&class_character(model, c), &w.cycle),
            None => Ok(0.0),
        }
    };
    let hc = model.triangulation().hodge();
    assemble(hc, model.degree(), action.coupling, obs.label(), &values, wilson.as_ref(), phase_of, model.torsion_orders(), truncation)
}

/// The constant-observable partition function from the base complex alone.
///
/// Agrees with [`partition_function`] for [`ObservableSpec::Constant`] but
/// never touches the subdivision, so it stays cheap on fine meshes.
pub fn partition_function_base(hc: &HodgeComplex, p: usize, action: &ActionSpec, truncation: Truncation) -> Result<PartitionResult> {
    check_kinds(action, &ObservableSpec::Constant)?;
    let n = hc.dim();
    if p > n {
        return Err(Error::DegreeOutOfRange { degree: p, max: n });
    }
    // The coexact slab eigenvalues are the nonzero part of the up spectrum.
    let values = hc.up_spectrum(p)?.nonzero().to_vec();
    let torsion = if p < n { hc.topology().degree(p + 1)?.torsion.clone() } else { Vec::new() };
    assemble(hc, p, action.coupling, ObservableSpec::Constant.label(), &values, None, |_| Ok(0.0), &torsion, truncation)
}

#[allow(clippy::too_many_arguments)]
fn assemble<F: Fn(&ClassCoords) -> Result<f64>>(
    hc: &HodgeComplex,
    p: usize,
    g2: f64,
    label: String,
    values: &[f64],
    wilson: Option<&WilsonData>,
    phase_of: F,
    torsion_orders: &[u64],
    truncation: Truncation,
) -> Result<PartitionResult> {
    let n = hc.dim();
    let (log_pref, breakdown) = log_prefactor(hc, p)?;
    let mut log_gaussian = 0.5 * values.len() as f64 * (2.0 * PI * g2).ln() - 0.5 * compensated_sum(values.iter().map(|l| l.ln()));
    let charge = wilson.map_or(0, |w| w.charge) as f64;
    if let Some(w) = wilson {
        log_gaussian -= 2.0 * PI * PI * charge * charge * g2 * compensated_sum(w.linear.iter().zip(values).map(|(l, lam)| l * l / lam));
    }
    let h = if p < n { hc.h_matrix(p + 1)? } else { Mat::zeros(0, 0) };
    let b = h.nrows();
    let a = times_i(&(&h / (2.0 * PI * g2)));
    let zero_class = |torsion: Vec<u64>| ClassCoords { free: vec![0; b], torsion };
    let free_phase: Vec<f64> = (0..b)
        .map(|j| {
            let mut c = zero_class(vec![0; torsion_orders.len()]);
            c.free[j] = 1;
            phase_of(&c)
        })
        .collect::<Result<_>>()?;
    let torsion = torsion_elements(torsion_orders);
    let survives = wilson.map_or(true, |w| w.survives);
    let mut sum = Vec::with_capacity(torsion.len());
    let mut radius = truncation.radius;
    let mut tail = 0.0;
    let mut tors_phase = Vec::with_capacity(torsion.len());
    for t in &torsion {
        let s = phase_of(&zero_class(t.clone()))?;
        tors_phase.push(s);
        let shift: Vec<f64> = free_phase.iter().map(|f| charge * f).collect();
        let th = theta_with_characteristic(&a, &shift, truncation.radius, truncation.tolerance / torsion.len() as f64)?;
        radius = radius.max(th.radius);
        tail += th.tail_bound;
        sum.push((Complex64::from_polar(1.0, 2.0 * PI * charge * s) * th.value).re);
    }
    let class_sum = if survives { compensated_sum(sum) } else { 0.0 };
    if tail > truncation.tolerance {
        return Err(Error::TruncationInsufficient { radius, tail });
    }
    let window = lattice_window(b, radius);
    let mut class_sum_terms = Vec::new();
    let total_terms = window.len() * torsion.len();
    for v in &window {
        let quad: f64 = (0..b).map(|i| (0..b).map(|j| v[i] as f64 * h[(i, j)] * v[j] as f64).sum::<f64>()).sum();
        for (t, s) in torsion.iter().zip(&tors_phase) {
            let phase = charge * (v.iter().zip(&free_phase).map(|(&x, f)| x as f64 * f).sum::<f64>() + s);
            let weight = if survives { (-quad / (2.0 * g2)).exp() * (2.0 * PI * phase).cos() } else { 0.0 };
            if total_terms <= MAX_STORED_TERMS || weight.abs() > 1e-15 {
                class_sum_terms.push(ClassTerm { free: v.clone(), torsion: t.clone(), weight });
            }
        }
    }
    let log_abs = log_pref + log_gaussian + class_sum.abs().ln();
    let sign = if class_sum == 0.0 { 0.0 } else { class_sum.signum() };
    Ok(PartitionResult {
        degree: p,
        coupling: g2,
        observable: label,
        value: if sign == 0.0 { 0.0 } else { sign * log_abs.exp() },
        log_abs,
        sign,
        log_prefactor: log_pref,
        prefactor_breakdown: breakdown,
        log_gaussian,
        slab_dim: values.len(),
        class_sum,
        class_sum_terms,
        truncation: TruncationReport { radius, tail_bound: tail, tolerance: truncation.tolerance, terms: total_terms },
        oracle_value: None,
    })
}

pub(super) fn wilson_zero_mode(model: &CharacterModel, ch: &CharacterCoords, cycle: &[i64], charge: i64) -> Result<Complex64> {
    let mut err = None;
    let (re, im) = complex_zero_mode(
        model.torus_dim(),
        |z| {
            let c = CharacterCoords { z: z.to_vec(), ..ch.clone() };
            match model.evaluate(&c, cycle) {
                Ok(f) => {
                    let w = Complex64::from_polar(1.0, 2.0 * PI * charge as f64 * f);
                    (w.re, w.im)
                }
                Err(e) => {
                    err = Some(e);
                    (0.0, 0.0)
                }
            }
        },
        4,
        1024,
        1e-12,
    )?;
    match err {
        Some(e) => Err(e),
        None => Ok(Complex64::new(re, im)),
    }
}
