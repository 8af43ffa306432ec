use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use super::{CharacterCoords, CharacterModel, CsTriangulation};
use crate::exact::ClassCoords;
use crate::linalg::{from_columns, max_abs_slice, numerical_rank, sub, Mat};
use crate::{Error, Result};

const RANK_TOL: f64 = 1e-10;
const CLASS_TOL: f64 = 1e-9;

/// A group `ℝ^a × T^b × ℤ^c × F` with `|F| = finite_order`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupShape {
    pub name: String,
    pub vector_dim: usize,
    pub torus_dim: usize,
    pub lattice_rank: usize,
    pub finite_order: u64,
}

impl GroupShape {
    fn new(name: &str, vector_dim: usize, torus_dim: usize, lattice_rank: usize, finite_order: u64) -> Self {
        Self { name: name.into(), vector_dim, torus_dim, lattice_rank, finite_order }
    }

    /// Dimension as a Lie group.
    pub fn lie_dim(&self) -> usize {
        self.vector_dim + self.torus_dim
    }

    /// `rank ℤ − dim T`, additive along short exact sequences of such groups.
    pub fn discrete_euler(&self) -> i64 {
        self.lattice_rank as i64 - self.torus_dim as i64
    }
}

/// Whether `0 → a → b → c → 0` can be exact on invariants alone.
fn short_exact(a: &GroupShape, b: &GroupShape, c: &GroupShape) -> bool {
    a.lie_dim() + c.lie_dim() == b.lie_dim()
        && a.discrete_euler() + c.discrete_euler() == b.discrete_euler()
        && a.finite_order.checked_mul(c.finite_order) == Some(b.finite_order)
}

/// The nine groups of the commutative grid in degree `p`, row by row:
///
/// ```text
/// H^p(E)/H^p_I     →  H^p(I; ℝ/ℤ)  →  ker(H^{p+1}(I) → H^{p+1}(E))
/// E^p/E^p_0        →  Diff^p        →  H^{p+1}(I)
/// dE^p             →  E^{p+1}_0     →  H^{p+1}_I(E)
/// ```
#[derive(Clone, Debug, PartialEq)]
pub struct GridReport {
    pub degree: usize,
    pub groups: [[GroupShape; 3]; 3],
    pub rows_exact: [bool; 3],
    pub columns_exact: [bool; 3],
    /// Largest `W′w − r` residual for `(w, [r])` in the image of
    /// `(δ₁, δ₂)`, one per class generator.
    pub q_residual: f64,
}

impl GridReport {
    pub fn passed(&self) -> bool {
        self.rows_exact.iter().chain(&self.columns_exact).all(|&b| b) && self.q_residual <= CLASS_TOL
    }

    /// Alternating sums of Lie dimensions and discrete Euler numbers along
    /// each row, then each column.
    pub fn alternating_sums(&self) -> Vec<(i64, i64)> {
        let alt = |a: &GroupShape, b: &GroupShape, c: &GroupShape| {
            (a.lie_dim() as i64 - b.lie_dim() as i64 + c.lie_dim() as i64, a.discrete_euler() - b.discrete_euler() + c.discrete_euler())
        };
        let g = &self.groups;
        let mut out: Vec<_> = (0..3).map(|r| alt(&g[r][0], &g[r][1], &g[r][2])).collect();
        out.extend((0..3).map(|c| alt(&g[0][c], &g[1][c], &g[2][c])));
        out
    }
}

/// Number of free generators `ũ_j` of `H^k(L′)` realized by a closed form in
/// `E^k`, i.e. the rank of `H^k_I(E)`.
fn realized_rank(cs: &CsTriangulation, k: usize) -> Result<usize> {
    if k > cs.dim() {
        return Ok(0);
    }
    let fine = cs.fine_topology().degree(k)?;
    let harmonic = cs.hodge().harmonic_integral_basis(k)?;
    let mut realized = Vec::new();
    for (j, u) in fine.cocycles.iter().enumerate() {
        let w = cs.embed(k, &harmonic[j]);
        let v: Vec<f64> = w.iter().zip(u).map(|(a, &b)| a - b as f64).collect();
        if cs.exactness_residual(k, &v) <= CLASS_TOL {
            realized.push(harmonic[j].clone());
        }
    }
    if realized.is_empty() {
        return Ok(0);
    }
    Ok(numerical_rank(&from_columns(cs.base().count(k), &realized), RANK_TOL))
}

/// Dimension of the closed subspace of `E^k`, read from the kernel of `d`
/// pushed into `L′`.
fn closed_dim(cs: &CsTriangulation, k: usize) -> usize {
    let n = cs.base().count(k);
    if k == cs.dim() {
        return n;
    }
    n - numerical_rank(&(cs.fine_d(k) * cs.embedding(k)), RANK_TOL)
}

fn exact_dim(cs: &CsTriangulation, k: usize) -> usize {
    if k == 0 {
        0
    } else {
        numerical_rank(&(cs.fine_d(k - 1) * cs.embedding(k - 1)), RANK_TOL)
    }
}

fn product(v: &[u64]) -> u64 {
    v.iter().product()
}

/// Shapes of the nine grid groups in degree `p`, each from its own
/// kernel, image or Smith form, and exactness of every row and column.
pub fn grid_check(cs: &Arc<CsTriangulation>, p: usize) -> Result<GridReport> {
    let n = cs.dim();
    if p > n {
        return Err(Error::DegreeOutOfRange { degree: p, max: n });
    }
    let ft = cs.fine_topology();
    let here = ft.degree(p)?;
    let next = ft.degree(p + 1).ok();
    let dim_h = closed_dim(cs, p) - exact_dim(cs, p);
    let ell = realized_rank(cs, p)?;
    let ell_next = realized_rank(cs, p + 1)?;
    let rank_dp = if p < n { exact_dim(cs, p + 1) } else { 0 };
    let free_next = next.map_or(0, |d| d.betti);
    let tors_next = next.map_or(1, |d| product(&d.torsion));
    let hom_tors = product(&here.homology_torsion);
    let dim_ep = cs.base().count(p);
    let model = CharacterModel::new(cs.clone(), p)?;
    let groups = [
        [
            GroupShape::new("H^p(E)/H^p_I", dim_h - ell.min(dim_h), ell.min(dim_h), 0, 1),
            GroupShape::new("H^p(I;R/Z)", 0, here.betti, 0, hom_tors),
            GroupShape::new("ker(H^{p+1}(I)->H^{p+1}(E))", 0, 0, free_next - ell_next.min(free_next), tors_next),
        ],
        [
            GroupShape::new("E^p/E^p_0", dim_ep - exact_dim(cs, p) - ell.min(dim_h), ell.min(dim_h), 0, 1),
            GroupShape::new("Diff^p", model.slab_dim(), model.torus_dim(), model.class_rank(), product(model.torsion_orders())),
            GroupShape::new("H^{p+1}(I)", 0, 0, free_next, tors_next),
        ],
        [
            GroupShape::new("dE^p", rank_dp, 0, 0, 1),
            GroupShape::new("E^{p+1}_0", rank_dp, 0, ell_next, 1),
            GroupShape::new("H^{p+1}_I(E)", 0, 0, ell_next, 1),
        ],
    ];
    let rows_exact = core::array::from_fn(|r| short_exact(&groups[r][0], &groups[r][1], &groups[r][2]));
    let columns_exact = core::array::from_fn(|c| short_exact(&groups[0][c], &groups[1][c], &groups[2][c]));
    let mut q_residual = 0.0f64;
    for j in 0..model.class_rank() {
        let mut c = model.zero_class();
        c.free[j] = 1;
        q_residual = q_residual.max(model.q_membership_residual(&model.delta2_preimage(&c)));
    }
    for i in 0..model.torsion_orders().len() {
        let mut c = model.zero_class();
        c.torsion[i] = 1;
        q_residual = q_residual.max(model.q_membership_residual(&model.delta2_preimage(&c)));
    }
    let report = GridReport { degree: p, groups, rows_exact, columns_exact, q_residual };
    if let Some(bad) = report.rows_exact.iter().position(|b| !b) {
        return Err(Error::ExactnessViolation { node: alloc::format!("row {bad} in degree {p}") });
    }
    if let Some(bad) = report.columns_exact.iter().position(|b| !b) {
        return Err(Error::ExactnessViolation { node: alloc::format!("column {bad} in degree {p}") });
    }
    if report.q_residual > CLASS_TOL {
        return Err(Error::ExactnessViolation { node: alloc::format!("Q membership in degree {p}") });
    }
    Ok(report)
}

/// Checks of the two exact sequences through `Diff^p` and of their
/// compatibility with the spark presentation.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactSequenceReport {
    pub degree: usize,
    /// `(dim T^{b_p}, rank H_p(L′))`: identity component of `ker δ₁`.
    pub kernel_torus: (usize, usize),
    /// `(|tor H^{p+1}(L′)|, |tor H_p(L′)|)`: component group of `ker δ₁`.
    pub kernel_finite: (u64, u64),
    /// `(n_p, rank d_{p−1} + b_p + rank d_p)`: `E^p/E^p_0` onto `ker δ₂`.
    pub delta2_ranks: (usize, usize),
    /// Every class generator has a preimage under `δ₂`.
    pub delta2_surjective: bool,
    /// Every generator of `E^{p+1}_0` has a preimage under `δ₁`.
    pub delta1_surjective: bool,
    /// Largest residual of `Φ*[u] = [w]` over generators.
    pub q_residual: f64,
    /// Largest disagreement of the spark ladder on generators.
    pub ladder_residual: f64,
}

impl ExactSequenceReport {
    pub fn passed(&self) -> bool {
        self.kernel_torus.0 == self.kernel_torus.1
            && self.kernel_finite.0 == self.kernel_finite.1
            && self.delta2_ranks.0 == self.delta2_ranks.1
            && self.delta2_surjective
            && self.delta1_surjective
            && self.q_residual <= CLASS_TOL
            && self.ladder_residual <= CLASS_TOL
    }
}

fn close(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() {
        0.0
    } else {
        max_abs_slice(&sub(a, b))
    }
}

/// Generators of `Diff^p`: unit torus coordinates at `½`, coexact basis
/// vectors and class generators.
fn generators(m: &CharacterModel) -> Vec<CharacterCoords> {
    let zero = m.zero();
    let mut out = Vec::new();
    for j in 0..m.torus_dim() {
        let mut z = vec![0.0; m.torus_dim()];
        z[j] = 0.5;
        out.push(CharacterCoords { z, ..zero.clone() });
    }
    let b: &Mat = m.coexact_basis();
    for j in 0..b.ncols() {
        out.push(CharacterCoords { tau: b.column(j).iter().copied().collect(), ..zero.clone() });
    }
    for j in 0..m.class_rank() {
        let mut c = m.zero_class();
        c.free[j] = 1;
        out.push(m.delta2_preimage(&c));
    }
    for i in 0..m.torsion_orders().len() {
        let mut c = m.zero_class();
        c.torsion[i] = 1;
        out.push(m.delta2_preimage(&c));
    }
    out
}

pub fn exact_sequence_report(model: &CharacterModel) -> Result<ExactSequenceReport> {
    let cs = model.triangulation();
    let p = model.degree();
    let n = cs.dim();
    let ft = cs.fine_topology();
    let here = ft.degree(p)?;
    let hc = cs.hodge();
    let rank_prev = if p == 0 { 0 } else { hc.rank_d(p - 1) };
    let rank_here = if p == n { 0 } else { hc.rank_d(p) };

    let mut delta2_surjective = true;
    let mut classes: Vec<ClassCoords> = Vec::new();
    for j in 0..model.class_rank() {
        let mut c = model.zero_class();
        c.free[j] = 1;
        classes.push(c);
    }
    for i in 0..model.torsion_orders().len() {
        let mut c = model.zero_class();
        c.torsion[i] = 1;
        classes.push(c);
    }
    let mut q_residual = 0.0f64;
    for c in &classes {
        let ch = model.delta2_preimage(c);
        delta2_surjective &= model.validate(&ch).is_ok() && model.delta2(&ch) == *c;
        q_residual = q_residual.max(model.q_membership_residual(&ch));
    }

    // Generators of E^{p+1}_0: the integral harmonic forms and d of a basis
    // of the coexact slab.
    let mut delta1_surjective = true;
    if p < n {
        let mut targets: Vec<Vec<f64>> = model.harmonic_basis_next().to_vec();
        let b = model.coexact_basis();
        for j in 0..b.ncols() {
            let col: Vec<f64> = b.column(j).iter().copied().collect();
            targets.push(crate::linalg::mat_vec(hc.d(p), &col));
        }
        for w in &targets {
            delta1_surjective &= match model.delta1_preimage(w) {
                Ok(ch) => close(&model.delta1(&ch), w) <= CLASS_TOL,
                Err(_) => false,
            };
        }
    }

    let mut ladder_residual = 0.0f64;
    for ch in generators(model) {
        let sp = model.to_spark(&ch);
        ladder_residual = ladder_residual.max(close(&sp.e, &model.delta1(&ch)));
        if p < n {
            let c = ft.class_of(cs.fine(), p + 1, &sp.r)?;
            if c != model.delta2(&ch) {
                ladder_residual = f64::INFINITY;
            }
        }
        if ch.c == model.zero_class() {
            let mut want = cs.embed(p, &ch.tau);
            for (rho, &z) in model.harmonic_basis().iter().zip(&ch.z) {
                crate::linalg::axpy(z, &cs.embed(p, rho), &mut want);
            }
            ladder_residual = ladder_residual.max(close(&sp.a, &want));
            if sp.r.iter().any(|&v| v != 0) {
                ladder_residual = f64::INFINITY;
            }
        }
    }

    Ok(ExactSequenceReport {
        degree: p,
        kernel_torus: (model.torus_dim(), here.betti),
        kernel_finite: (product(model.torsion_orders()), product(&here.homology_torsion)),
        delta2_ranks: (cs.base().count(p), rank_prev + model.torus_dim() + rank_here),
        delta2_surjective,
        delta1_surjective,
        q_residual,
        ladder_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::fixtures;
    use crate::hodge::HodgeOptions;

    fn cs(x: crate::complex::SimplicialComplex) -> Arc<CsTriangulation> {
        Arc::new(CsTriangulation::perturbed(Arc::new(x), 7, 0.25, HodgeOptions::default()).unwrap())
    }

    #[test]
    fn circle_degree_zero_bookkeeping() {
        let c = cs(fixtures::cycle(5));
        let r = grid_check(&c, 0).unwrap();
        let diff = &r.groups[1][1];
        assert_eq!((diff.torus_dim, diff.vector_dim, diff.lattice_rank, diff.finite_order), (1, 4, 1, 1));
        assert!(r.alternating_sums().iter().all(|&s| s == (0, 0)));
    }

    #[test]
    fn sphere_degree_one_has_no_torus() {
        let c = cs(fixtures::tetrahedron_boundary());
        let r = grid_check(&c, 1).unwrap();
        assert_eq!(r.groups[0][0].lie_dim(), 0);
        assert_eq!(r.groups[1][0].torus_dim, 0);
        assert_eq!(r.groups[1][0].vector_dim, c.base().count(1) - c.hodge().rank_d(0));
        assert!(r.passed());
    }

    #[test]
    fn grid_and_sequences_on_catalog() {
        for x in [fixtures::cycle(4), fixtures::torus7(), fixtures::tetrahedron_boundary(), fixtures::rp2_6()] {
            let c = cs(x);
            for p in 0..=c.dim() {
                let g = grid_check(&c, p).unwrap();
                assert!(g.passed(), "{g:?}");
                let m = CharacterModel::new(c.clone(), p).unwrap();
                let e = exact_sequence_report(&m).unwrap();
                assert!(e.passed(), "{e:?}");
            }
        }
    }

    #[test]
    fn projective_plane_torsion_in_the_grid() {
        let c = cs(fixtures::rp2_6());
        let r = grid_check(&c, 1).unwrap();
        assert_eq!(r.groups[0][1].finite_order, 2);
        assert_eq!(r.groups[1][1].finite_order, 2);
        assert_eq!(r.groups[0][2].finite_order, 2);
    }
}
