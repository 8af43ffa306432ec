use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
#[allow(unused_imports)]
use num_traits::Float;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use rand_distr::StandardNormal;

use super::{wrap, CsTriangulation};
use crate::exact::{ClassCoords, IntegerMatrix, IntegerSolver};
use crate::linalg::{axpy, inner, lstsq_min_norm, mat_vec, max_abs_slice, Mat};
use crate::{Error, Result};

/// A degree-`p` differential character in coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct CharacterCoords {
    pub degree: usize,
    /// Harmonic torus coordinates in `[0, 1)`.
    pub z: Vec<f64>,
    /// Coexact fluctuation: a `p`-cochain on the base in `im δ_{p+1}`.
    pub tau: Vec<f64>,
    /// Integral class `δ₂` of the character.
    pub c: ClassCoords,
}

/// A spark `(a, e, r)` with `da = e − r` and `dr = 0` on the subdivision.
#[derive(Clone, Debug, PartialEq)]
pub struct SparkTriple {
    pub degree: usize,
    /// Real `p`-cochain on `L′`.
    pub a: Vec<f64>,
    /// Element of `E^{p+1}`, as a cochain on the base.
    pub e: Vec<f64>,
    /// Integer `(p+1)`-cocycle on `L′`.
    pub r: Vec<i64>,
}

impl SparkTriple {
    pub fn add(&self, other: &Self) -> Self {
        let plus = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a + b).collect();
        Self {
            degree: self.degree,
            a: plus(&self.a, &other.a),
            e: plus(&self.e, &other.e),
            r: self.r.iter().zip(&other.r).map(|(a, b)| a + b).collect(),
        }
    }
}

/// Witness `(b, s)` of `a − a′ = db + s`, `r − r′ = −ds`.
#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceCertificate {
    pub b: Vec<f64>,
    pub s: Vec<i64>,
    /// `max |a − a′ − db − s|`.
    pub residual: f64,
    /// `max |r − r′ + ds|`, which must vanish exactly.
    pub integer_residual: i64,
    /// `max |e − e′|`.
    pub e_difference: f64,
}

impl EquivalenceCertificate {
    pub fn holds(&self, tol: f64) -> bool {
        self.integer_residual == 0 && self.residual <= tol && self.e_difference <= tol
    }
}

/// Largest tolerated spark-equation residual.
pub const SPARK_TOLERANCE: f64 = 1e-10;

/// Characters of one degree on a fixed pair `(L, L′)`.
#[derive(Clone, Debug)]
pub struct CharacterModel {
    cs: Arc<CsTriangulation>,
    degree: usize,
    /// Harmonic representatives of degree `p` on the base, periods `δ_jk`.
    rho: Vec<Vec<f64>>,
    /// The same in degree `p + 1`.
    rho_next: Vec<Vec<f64>>,
    /// `M`-orthonormal basis of `im δ_{p+1}` on the base.
    coexact: Mat,
    gram: Mat,
    /// Free cycles of degree `p` on `L′`.
    cycles: Vec<Vec<i64>>,
    /// Integer cocycles of degree `p` on `L′` dual to `cycles`.
    cocycles: Vec<Vec<i64>>,
    /// Free generators `ũ_j` of `H^{p+1}(L′)` and lifts with `dT_j = W′ρ_j − ũ_j`.
    free_cocycles: Vec<Vec<i64>>,
    free_lifts: Vec<Vec<f64>>,
    /// Torsion generators `w_i`, orders, and exact lifts `T_i = −x_i / m_i`.
    torsion_cocycles: Vec<Vec<i64>>,
    torsion_orders: Vec<u64>,
    torsion_lifts: Vec<Vec<BigRational>>,
    /// Integer solver for `d s = y` from degree `p` to `p + 1` on `L′`.
    solver: IntegerSolver,
}

fn dot_i(a: &[f64], b: &[i64]) -> f64 {
    a.iter().zip(b).map(|(x, &y)| x * y as f64).sum()
}

fn frac_part(q: &BigRational) -> f64 {
    let fl = q.floor();
    (q - fl).to_f64().unwrap_or(0.0)
}

impl CharacterModel {
    pub fn new(cs: Arc<CsTriangulation>, degree: usize) -> Result<Self> {
        let n = cs.dim();
        if degree > n {
            return Err(Error::DegreeOutOfRange { degree, max: n });
        }
        let hodge = cs.hodge();
        let frame = hodge.frame(degree)?;
        let rho = frame.harmonic_integral_basis.clone();
        let rho_next = if degree < n { hodge.harmonic_integral_basis(degree + 1)? } else { Vec::new() };
        let fine = cs.fine().clone();
        let ft = cs.fine_topology();
        let here = ft.degree(degree)?;
        let (free_cocycles, torsion_cocycles, torsion_orders, primitives) = match ft.degree(degree + 1) {
            Ok(next) => (next.cocycles.clone(), next.torsion_cocycles.clone(), next.torsion.clone(), next.torsion_primitives.clone()),
            Err(_) => (Vec::new(), Vec::new(), Vec::new(), Vec::new()),
        };
        let mut free_lifts = Vec::with_capacity(free_cocycles.len());
        if degree < n {
            let d = cs.fine_d(degree);
            let rhs = Mat::from_fn(fine.count(degree + 1), free_cocycles.len(), |r, j| {
                cs.embed(degree + 1, &rho_next[j])[r] - free_cocycles[j][r] as f64
            });
            let t = lstsq_min_norm(d, &rhs, 1e-12);
            let resid = (&rhs - d * &t).abs().max();
            if resid > 1e-9 {
                return Err(Error::ExactnessViolation { node: alloc::format!("free lift in degree {degree}: {resid:e}") });
            }
            for j in 0..free_cocycles.len() {
                free_lifts.push(t.column(j).iter().copied().collect());
            }
        }
        let torsion_lifts = primitives
            .iter()
            .zip(&torsion_orders)
            .map(|(x, &m)| x.iter().map(|&v| BigRational::new(BigInt::from(-v), BigInt::from(m))).collect())
            .collect();
        let solver = if degree < n {
            IntegerSolver::new(&IntegerMatrix::from_sparse(&fine.coboundary(degree)))
        } else {
            IntegerSolver::new(&IntegerMatrix::zeros(0, fine.count(degree)))
        };
        Ok(Self {
            degree,
            rho,
            rho_next,
            coexact: frame.coexact_basis.clone(),
            gram: frame.gram.clone(),
            cycles: here.cycles.clone(),
            cocycles: here.cocycles.clone(),
            free_cocycles,
            free_lifts,
            torsion_cocycles,
            torsion_orders,
            torsion_lifts,
            solver,
            cs,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn triangulation(&self) -> &Arc<CsTriangulation> {
        &self.cs
    }

    /// `b_p`, the dimension of the harmonic torus.
    pub fn torus_dim(&self) -> usize {
        self.rho.len()
    }

    /// Dimension of the coexact slab `im δ_{p+1}`.
    pub fn slab_dim(&self) -> usize {
        self.coexact.ncols()
    }

    /// Rank of the free part of `H^{p+1}(L′; ℤ)`.
    pub fn class_rank(&self) -> usize {
        self.free_cocycles.len()
    }

    pub fn torsion_orders(&self) -> &[u64] {
        &self.torsion_orders
    }

    pub fn harmonic_basis(&self) -> &[Vec<f64>] {
        &self.rho
    }

    pub fn harmonic_basis_next(&self) -> &[Vec<f64>] {
        &self.rho_next
    }

    pub fn coexact_basis(&self) -> &Mat {
        &self.coexact
    }

    pub fn cycles(&self) -> &[Vec<i64>] {
        &self.cycles
    }

    /// The character with all coordinates zero.
    pub fn zero(&self) -> CharacterCoords {
        CharacterCoords { degree: self.degree, z: vec![0.0; self.torus_dim()], tau: vec![0.0; self.gram.nrows()], c: self.zero_class() }
    }

    pub fn zero_class(&self) -> ClassCoords {
        ClassCoords { free: vec![0; self.class_rank()], torsion: vec![0; self.torsion_orders.len()] }
    }

    /// A random character: uniform torus point, Gaussian fluctuation of
    /// size `tau_scale`, class coordinates in `[−2, 2]`.
    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R, tau_scale: f64) -> CharacterCoords {
        let z = (0..self.torus_dim()).map(|_| rng.random::<f64>()).collect();
        let y: Vec<f64> = (0..self.slab_dim()).map(|_| tau_scale * rng.sample::<f64, _>(StandardNormal)).collect();
        let tau = mat_vec(&self.coexact, &y);
        let free = (0..self.class_rank()).map(|_| rng.random_range(-2..=2)).collect();
        let torsion = self.torsion_orders.iter().map(|&m| rng.random_range(0..m)).collect();
        CharacterCoords { degree: self.degree, z, tau, c: ClassCoords { free, torsion } }
    }

    fn coexact_projection(&self, x: &[f64]) -> Vec<f64> {
        let coeffs: Vec<f64> =
            (0..self.slab_dim()).map(|j| inner(&self.gram, &self.coexact.column(j).iter().copied().collect::<Vec<_>>(), x)).collect();
        mat_vec(&self.coexact, &coeffs)
    }

    /// Checks shapes and the coordinate invariants.
    pub fn validate(&self, ch: &CharacterCoords) -> Result<()> {
        if ch.degree != self.degree {
            return Err(Error::DegreeMismatch { expected: self.degree, found: ch.degree });
        }
        if ch.z.len() != self.torus_dim()
            || ch.tau.len() != self.gram.nrows()
            || ch.c.free.len() != self.class_rank()
            || ch.c.torsion.len() != self.torsion_orders.len()
        {
            return Err(Error::Shape("character coordinates".into()));
        }
        if ch.z.iter().any(|z| !(0.0..1.0).contains(z)) {
            return Err(Error::InvalidInput("torus coordinates must lie in [0, 1)".into()));
        }
        if ch.c.torsion.iter().zip(&self.torsion_orders).any(|(t, m)| t >= m) {
            return Err(Error::InvalidInput("torsion coordinate exceeds its order".into()));
        }
        let off: Vec<f64> = ch.tau.iter().zip(self.coexact_projection(&ch.tau)).map(|(a, b)| a - b).collect();
        let scale = inner(&self.gram, &ch.tau, &ch.tau).sqrt().max(1.0);
        if inner(&self.gram, &off, &off).sqrt() > 1e-9 * scale {
            return Err(Error::InvalidInput("fluctuation is not coexact".into()));
        }
        Ok(())
    }

    /// `δ₁`: the field strength `dτ + Σ c_j ρ_j`, a closed form with integral
    /// periods, as a cochain on the base.
    pub fn delta1(&self, ch: &CharacterCoords) -> Vec<f64> {
        let n = self.cs.dim();
        if self.degree == n {
            return Vec::new();
        }
        let d = self.cs.hodge().d(self.degree);
        let mut w = mat_vec(d, &ch.tau);
        for (rho, &c) in self.rho_next.iter().zip(&ch.c.free) {
            axpy(c as f64, rho, &mut w);
        }
        w
    }

    /// `δ₂`: the integral class.
    pub fn delta2(&self, ch: &CharacterCoords) -> ClassCoords {
        ch.c.clone()
    }

    /// A character with `δ₂ = c`, built from the stored lift of `c`.
    pub fn delta2_preimage(&self, c: &ClassCoords) -> CharacterCoords {
        CharacterCoords { c: c.clone(), ..self.zero() }
    }

    /// A character with `δ₁ = w`, for `w` closed with integral periods.
    pub fn delta1_preimage(&self, w: &[f64]) -> Result<CharacterCoords> {
        let p = self.degree;
        let base = self.cs.base();
        let periods: Vec<f64> = self.cs.base_topology().degree(p + 1)?.cycles.iter().map(|z| dot_i(w, z)).collect();
        let free: Vec<i64> = periods.iter().map(|v| v.round() as i64).collect();
        if periods.iter().zip(&free).any(|(v, &r)| (v - r as f64).abs() > 1e-8) {
            return Err(Error::InvalidInput("form has non-integral periods".into()));
        }
        let mut rest = w.to_vec();
        for (rho, &c) in self.rho_next.iter().zip(&free) {
            axpy(-(c as f64), rho, &mut rest);
        }
        let tau = self.solve_coexact(&rest)?;
        if base.count(p + 1) != w.len() {
            return Err(Error::Shape("form of the wrong degree".into()));
        }
        Ok(CharacterCoords {
            degree: p,
            z: vec![0.0; self.torus_dim()],
            tau,
            c: ClassCoords { free, torsion: vec![0; self.torsion_orders.len()] },
        })
    }

    /// `τ ∈ im δ_{p+1}` with `dτ = target`.
    fn solve_coexact(&self, target: &[f64]) -> Result<Vec<f64>> {
        if self.slab_dim() == 0 {
            if max_abs_slice(target) > 1e-9 {
                return Err(Error::NotASpark { residual: max_abs_slice(target) });
            }
            return Ok(vec![0.0; self.gram.nrows()]);
        }
        let db = self.cs.hodge().d(self.degree) * &self.coexact;
        let rhs = Mat::from_column_slice(target.len(), 1, target);
        let y = lstsq_min_norm(&db, &rhs, 1e-12);
        let resid = (&rhs - &db * &y).abs().max();
        let scale = max_abs_slice(target).max(1.0);
        if resid > 1e-9 * scale {
            return Err(Error::NotASpark { residual: resid });
        }
        Ok(mat_vec(&self.coexact, &y.column(0).iter().copied().collect::<Vec<_>>()))
    }

    /// Real part of the lift `T_c` on `L′`, plus the exact torsion part.
    fn class_lift(&self, c: &ClassCoords) -> (Vec<f64>, Vec<BigRational>) {
        let len = self.cs.fine().count(self.degree);
        let mut real = vec![0.0; len];
        for (t, &n) in self.free_lifts.iter().zip(&c.free) {
            axpy(n as f64, t, &mut real);
        }
        let mut exact = vec![BigRational::zero(); len];
        for (t, &m) in self.torsion_lifts.iter().zip(&c.torsion) {
            if m == 0 {
                continue;
            }
            let m = BigRational::from_integer(BigInt::from(m));
            for (e, v) in exact.iter_mut().zip(t) {
                *e += v * &m;
            }
        }
        (real, exact)
    }

    fn class_cocycle(&self, c: &ClassCoords) -> Vec<i64> {
        let len = if self.degree < self.cs.dim() { self.cs.fine().count(self.degree + 1) } else { 0 };
        let mut r = vec![0i64; len];
        for (u, &n) in self.free_cocycles.iter().zip(&c.free) {
            for (ri, &ui) in r.iter_mut().zip(u) {
                *ri += n * ui;
            }
        }
        for (w, &m) in self.torsion_cocycles.iter().zip(&c.torsion) {
            for (ri, &wi) in r.iter_mut().zip(w) {
                *ri += m as i64 * wi;
            }
        }
        r
    }

    /// The character as a function on `p`-cycles of `L′`, valued in `[0, 1)`.
    pub fn evaluate(&self, ch: &CharacterCoords, alpha: &[i64]) -> Result<f64> {
        let fine = self.cs.fine();
        let p = self.degree;
        if alpha.len() != fine.count(p) {
            return Err(Error::Shape(alloc::format!("chain of length {} in degree {p}", alpha.len())));
        }
        if p > 0 {
            if let Some(&bad) = fine.boundary_of(p, alpha).iter().find(|v| **v != 0) {
                return Err(Error::NotACycle { residual: bad });
            }
        }
        let mut acc = 0.0;
        for (rho, &z) in self.rho.iter().zip(&ch.z) {
            acc += z * dot_i(&self.cs.embed(p, rho), alpha);
        }
        acc += dot_i(&self.cs.embed(p, &ch.tau), alpha);
        let (real, exact) = self.class_lift(&ch.c);
        acc += dot_i(&real, alpha);
        let tors: BigRational = exact.iter().zip(alpha).map(|(e, &a)| e * BigInt::from(a)).sum();
        Ok(wrap(wrap(acc) + frac_part(&tors)))
    }

    /// `∫_β δ₁(ch)` for a `(p+1)`-chain `β` on `L′`.
    pub fn field_strength_integral(&self, ch: &CharacterCoords, beta: &[i64]) -> f64 {
        dot_i(&self.cs.embed(self.degree + 1, &self.delta1(ch)), beta)
    }

    /// Spark representative `(T, W′δ₁, c̃)`.
    pub fn to_spark(&self, ch: &CharacterCoords) -> SparkTriple {
        let p = self.degree;
        let mut a = self.cs.embed(p, &ch.tau);
        for (rho, &z) in self.rho.iter().zip(&ch.z) {
            axpy(z, &self.cs.embed(p, rho), &mut a);
        }
        let (real, exact) = self.class_lift(&ch.c);
        for ((ai, r), e) in a.iter_mut().zip(real).zip(exact) {
            *ai += r + e.to_f64().unwrap_or(0.0);
        }
        SparkTriple { degree: p, a, e: self.delta1(ch), r: self.class_cocycle(&ch.c) }
    }

    /// `max |da − (W′e − r)|`, and whether `dr = 0`.
    pub fn spark_residual(&self, sp: &SparkTriple) -> (f64, bool) {
        let p = self.degree;
        if p == self.cs.dim() {
            return (0.0, true);
        }
        let fine = self.cs.fine();
        let da = mat_vec(self.cs.fine_d(p), &sp.a);
        let we = self.cs.embed(p + 1, &sp.e);
        let res = da.iter().zip(&we).zip(&sp.r).map(|((x, y), &r)| (x - (y - r as f64)).abs()).fold(0.0, f64::max);
        let closed = fine.coboundary(p + 1).mul_vec(&sp.r).iter().all(|&v| v == 0);
        (res, closed)
    }

    fn check_spark(&self, sp: &SparkTriple) -> Result<()> {
        let fine = self.cs.fine();
        let p = self.degree;
        let next = if p < self.cs.dim() { fine.count(p + 1) } else { 0 };
        let base_next = if p < self.cs.dim() { self.cs.base().count(p + 1) } else { 0 };
        if sp.degree != p || sp.a.len() != fine.count(p) || sp.r.len() != next || sp.e.len() != base_next {
            return Err(Error::Shape("spark components".into()));
        }
        let (res, closed) = self.spark_residual(sp);
        let scale = max_abs_slice(&sp.a).max(1.0);
        if !closed || res > SPARK_TOLERANCE * scale {
            return Err(Error::NotASpark { residual: if closed { res } else { f64::INFINITY } });
        }
        Ok(())
    }

    /// Coordinates of the character a spark represents.
    pub fn from_spark(&self, sp: &SparkTriple) -> Result<CharacterCoords> {
        self.check_spark(sp)?;
        let p = self.degree;
        let c = if p < self.cs.dim() { self.cs.fine_topology().class_of(self.cs.fine(), p + 1, &sp.r)? } else { self.zero_class() };
        let mut rest = sp.e.clone();
        for (rho, &n) in self.rho_next.iter().zip(&c.free) {
            axpy(-(n as f64), rho, &mut rest);
        }
        let tau = self.solve_coexact(&rest)?;
        let mut g = sp.a.clone();
        axpy(-1.0, &self.cs.embed(p, &tau), &mut g);
        let (real, exact) = self.class_lift(&c);
        axpy(-1.0, &real, &mut g);
        let z = self
            .cycles
            .iter()
            .map(|cyc| {
                let tors: BigRational = exact.iter().zip(cyc).map(|(e, &a)| e * BigInt::from(a)).sum();
                wrap(dot_i(&g, cyc) - frac_part(&tors))
            })
            .collect();
        Ok(CharacterCoords { degree: p, z, tau, c })
    }

    /// Group sum, computed on spark representatives.
    pub fn add(&self, x: &CharacterCoords, y: &CharacterCoords) -> Result<CharacterCoords> {
        self.from_spark(&self.to_spark(x).add(&self.to_spark(y)))
    }

    /// Constructs `(b, s)` with `a − a′ = db + s` and `r − r′ = −ds`, or
    /// `None` when the sparks are not equivalent.
    pub fn equivalence_certificate(&self, x: &SparkTriple, y: &SparkTriple) -> Result<Option<EquivalenceCertificate>> {
        self.check_spark(x)?;
        self.check_spark(y)?;
        let p = self.degree;
        let fine = self.cs.fine();
        let e_difference = x.e.iter().zip(&y.e).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let minus_dr: Vec<i64> = x.r.iter().zip(&y.r).map(|(a, b)| b - a).collect();
        let Some(s0) = self.solver.solve(&minus_dr) else { return Ok(None) };
        let mut h: Vec<f64> = x.a.iter().zip(&y.a).zip(&s0).map(|((a, b), &s)| a - b - s as f64).collect();
        let mut s = s0;
        for (z, u) in self.cycles.iter().zip(&self.cocycles) {
            let per = dot_i(&h, z);
            let k = per.round();
            if (per - k).abs() > 1e-8 {
                return Ok(None);
            }
            let k = k as i64;
            for ((hi, si), &ui) in h.iter_mut().zip(s.iter_mut()).zip(u) {
                *hi -= (k * ui) as f64;
                *si += k * ui;
            }
        }
        let b = if p == 0 {
            Vec::new()
        } else {
            let d = self.cs.fine_d(p - 1);
            let rhs = Mat::from_column_slice(h.len(), 1, &h);
            lstsq_min_norm(d, &rhs, 1e-12).column(0).iter().copied().collect()
        };
        let db = if p == 0 { vec![0.0; h.len()] } else { mat_vec(self.cs.fine_d(p - 1), &b) };
        let residual =
            x.a.iter().zip(&y.a).zip(db.iter().zip(&s)).map(|((a, a2), (d, &si))| (a - a2 - d - si as f64).abs()).fold(0.0, f64::max);
        let ds = if p < self.cs.dim() { fine.coboundary(p).mul_vec(&s) } else { Vec::new() };
        let integer_residual = x.r.iter().zip(&y.r).zip(&ds).map(|((a, b), d)| (a - b + d).abs()).max().unwrap_or(0);
        Ok(Some(EquivalenceCertificate { b, s, residual, integer_residual, e_difference }))
    }

    /// Whether `W′w − r` is a coboundary on `L′` for the pair `(w, [r])`
    /// produced by `(δ₁, δ₂)`: the residual of the least-squares solve.
    pub fn q_membership_residual(&self, ch: &CharacterCoords) -> f64 {
        let p = self.degree;
        if p == self.cs.dim() {
            return 0.0;
        }
        let we = self.cs.embed(p + 1, &self.delta1(ch));
        let r = self.class_cocycle(&ch.c);
        let v: Vec<f64> = we.iter().zip(&r).map(|(a, &b)| a - b as f64).collect();
        self.cs.exactness_residual(p + 1, &v)
    }

    /// Lcm of the torsion orders; the torsion part of `T_c` has this
    /// denominator.
    pub fn torsion_denominator(&self) -> u64 {
        self.torsion_orders.iter().fold(1u64, |a, &b| a.lcm(&b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::circle_distance;
    use crate::complex::{fixtures, SimplicialComplex};
    use crate::hodge::HodgeOptions;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn model(x: SimplicialComplex, p: usize) -> CharacterModel {
        let cs = CsTriangulation::perturbed(Arc::new(x), 3, 0.25, HodgeOptions::default()).unwrap();
        CharacterModel::new(Arc::new(cs), p).unwrap()
    }

    #[test]
    fn flat_character_is_zero_everywhere() {
        let m = model(fixtures::torus7(), 1);
        let ch = m.zero();
        assert!(m.delta1(&ch).iter().all(|v| *v == 0.0));
        assert_eq!(m.delta2(&ch), m.zero_class());
        for z in m.cycles() {
            assert_eq!(m.evaluate(&ch, z).unwrap(), 0.0);
        }
    }

    #[test]
    fn circle_generator_has_unit_field_strength() {
        let m = model(fixtures::cycle(5), 0);
        let ch = m.delta2_preimage(&ClassCoords { free: vec![1], torsion: vec![] });
        let w = m.delta1(&ch);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let third = CharacterCoords { z: vec![1.0 / 3.0], ..m.zero() };
        let fine = m.triangulation().fine().clone();
        let mut vertex = vec![0i64; fine.count(0)];
        vertex[0] = 1;
        assert!(circle_distance(m.evaluate(&third, &vertex).unwrap() - 1.0 / 3.0) < 1e-12);
    }

    #[test]
    fn boundary_values_follow_the_field_strength() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for (x, p) in [(fixtures::cycle(4), 0), (fixtures::torus7(), 0), (fixtures::torus7(), 1), (fixtures::rp2_6(), 1)] {
            let m = model(x, p);
            let fine = m.triangulation().fine().clone();
            for _ in 0..20 {
                let ch = m.random(&mut rng, 0.7);
                m.validate(&ch).unwrap();
                let beta: Vec<i64> = (0..fine.count(p + 1)).map(|_| rng.random_range(-2..=2)).collect();
                let alpha = fine.boundary(p + 1).unwrap().mul_vec(&beta);
                let lhs = m.evaluate(&ch, &alpha).unwrap();
                let rhs = m.field_strength_integral(&ch, &beta);
                assert!(circle_distance(lhs - rhs) < 1e-8, "{lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn spark_round_trip_and_certificates() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for (x, p) in [(fixtures::torus7(), 1), (fixtures::tetrahedron_boundary(), 1), (fixtures::rp2_6(), 1), (fixtures::cycle(3), 0)] {
            let m = model(x, p);
            for _ in 0..10 {
                let ch = m.random(&mut rng, 0.5);
                let sp = m.to_spark(&ch);
                let (res, closed) = m.spark_residual(&sp);
                assert!(closed && res <= 1e-10, "{res}");
                let back = m.from_spark(&sp).unwrap();
                assert_eq!(back.c, ch.c);
                for (a, b) in back.z.iter().zip(&ch.z) {
                    assert!(circle_distance(a - b) < 1e-9);
                }
                let cert = m.equivalence_certificate(&sp, &m.to_spark(&back)).unwrap().unwrap();
                assert!(cert.holds(1e-9), "{cert:?}");
                assert!(m.q_membership_residual(&ch) < 1e-9);
            }
        }
    }

    #[test]
    fn inequivalent_sparks_have_no_certificate() {
        let m = model(fixtures::cycle(4), 0);
        let a = m.to_spark(&m.zero());
        let b = m.to_spark(&CharacterCoords { z: vec![0.5], ..m.zero() });
        assert!(m.equivalence_certificate(&a, &b).unwrap().is_none());
        let c = m.to_spark(&m.delta2_preimage(&ClassCoords { free: vec![1], torsion: vec![] }));
        assert!(m.equivalence_certificate(&a, &c).unwrap().map_or(true, |cert| !cert.holds(1e-9)));
    }

    #[test]
    fn torsion_lifts_are_exact() {
        let m = model(fixtures::rp2_6(), 1);
        assert_eq!(m.torsion_orders(), &[2]);
        let ch = m.delta2_preimage(&ClassCoords { free: vec![], torsion: vec![1] });
        assert!(m.delta1(&ch).iter().all(|v| v.abs() < 1e-12));
        let sp = m.to_spark(&ch);
        assert_eq!(m.from_spark(&sp).unwrap().c.torsion, vec![1]);
        let twice = m.add(&ch, &ch).unwrap();
        assert_eq!(twice.c.torsion, vec![0]);
    }

    #[test]
    fn invalid_inputs_are_reported() {
        let m = model(fixtures::torus7(), 1);
        let fine = m.triangulation().fine().clone();
        let mut edge = vec![0i64; fine.count(1)];
        edge[0] = 1;
        assert!(matches!(m.evaluate(&m.zero(), &edge), Err(Error::NotACycle { .. })));
        let mut sp = m.to_spark(&m.zero());
        sp.a[0] += 0.1;
        assert!(matches!(m.from_spark(&sp), Err(Error::NotASpark { .. })));
        let bad = CharacterCoords { z: vec![1.5, 0.0], ..m.zero() };
        assert!(m.validate(&bad).is_err());
    }
}
