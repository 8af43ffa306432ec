use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::complex::relation::{common_denominator, pairwise_relation, MAX_COEFF, PRECISION};
use crate::complex::SimplicialComplex;
use crate::exact::Topology;
use crate::linalg::{max_abs, null_space, numerical_rank, rank_mod_p, Mat};
use crate::whitney::embedding_matrix;
use crate::{Error, Result};

/// Largest tolerated `|∫_{∂α} ω − ∫_α dω|`.
pub const STOKES_TOLERANCE: f64 = 1e-12;
const RANK_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct PairingCheck {
    pub passed: bool,
    /// `(rank W′_k, dim E^k)` per degree.
    pub ranks: Vec<(usize, usize)>,
    /// Smallest `σ_min / σ_max` of `W′_k` over all degrees.
    pub min_singular_ratio: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IntegralityStatus {
    /// Nothing to test.
    Pass,
    /// No small integer relation between child integrals was found.
    HeuristicPass,
    Fail,
}

/// A parent simplex whose child integrals satisfy an integer relation.
#[derive(Clone, Debug, PartialEq)]
pub struct IntegralityWitness {
    pub degree: usize,
    /// Index of the parent simplex `σ`.
    pub simplex: usize,
    pub vertices: Vec<usize>,
    /// `∫_τ Wσ` for the children `τ` of `σ` of the same dimension.
    pub child_integrals: Vec<f64>,
    /// Positions (within `child_integrals`) of the related pair.
    pub pair: (usize, usize),
    /// `(a, b)` with `a·x = b·y` for the related pair.
    pub relation: (i64, i64),
    /// Smallest `n` with `n·∫_τ Wσ ∈ ℤ` for every child, when one exists: then
    /// `n·σ′` is a nonzero form with integral periods.
    pub multiplier: Option<u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntegralityCheck {
    pub status: IntegralityStatus,
    pub witness: Option<IntegralityWitness>,
    pub pairs_tested: usize,
    pub max_coeff: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeRhamRow {
    pub degree: usize,
    /// `dim H^k(E^•)`.
    pub dim_e: usize,
    /// `dim H^k(Hom(I_•, ℝ))`.
    pub dim_f: usize,
    /// Rank of the period matrix of closed forms against a cycle basis.
    pub period_rank: usize,
    pub passed: bool,
}

/// Outcome of checking the model axioms on a pair `(L, L′)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelReport {
    pub seed: Option<u64>,
    pub freeness: bool,
    /// A simplex of `L′` with `∂∂ ≠ 0` or a repeated vertex tuple.
    pub freeness_witness: Option<Vec<usize>>,
    pub pairing: PairingCheck,
    pub integrality: IntegralityCheck,
    pub stokes: f64,
    pub de_rham: Vec<DeRhamRow>,
}

impl ModelReport {
    pub fn passed(&self) -> bool {
        self.freeness
            && self.pairing.passed
            && self.integrality.status != IntegralityStatus::Fail
            && self.stokes <= STOKES_TOLERANCE
            && self.de_rham.iter().all(|r| r.passed)
    }
}

fn freeness(fine: &SimplicialComplex) -> Result<Option<Vec<usize>>> {
    for k in 0..=fine.dim() {
        let mut seen: Vec<&[usize]> = fine.simplices(k).collect();
        seen.sort_unstable();
        if let Some(w) = seen.windows(2).find(|w| w[0] == w[1]) {
            return Ok(Some(w[0].to_vec()));
        }
    }
    for k in 2..=fine.dim() {
        let dd = fine.boundary(k - 1)?.matmul(fine.boundary(k)?);
        if let Some((_, c, _)) = dd.triplets().into_iter().find(|t| t.2 != 0) {
            return Ok(Some(fine.simplex(k, c).to_vec()));
        }
    }
    Ok(None)
}

fn singular_ratio(m: &Mat) -> f64 {
    if m.ncols() == 0 {
        return 1.0;
    }
    let s = crate::linalg::singular_values(m);
    let hi = s.iter().fold(0.0f64, |a, &b| a.max(b));
    let lo = s.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    if hi == 0.0 {
        0.0
    } else {
        lo / hi
    }
}

fn integrality(base: &SimplicialComplex, fine: &SimplicialComplex, w: &[Mat]) -> IntegralityCheck {
    let link = fine.parent().expect("checked by the caller");
    let mut pairs_tested = 0;
    for k in 1..=base.dim() {
        let mut children: Vec<Vec<usize>> = alloc::vec![Vec::new(); base.count(k)];
        for (t, &(cd, c)) in link.carrier[k].iter().enumerate() {
            if cd == k {
                children[c].push(t);
            }
        }
        for (s, kids) in children.iter().enumerate() {
            let xs: Vec<f64> = kids.iter().map(|&t| w[k][(t, s)]).collect();
            let witness = |pair, relation| IntegralityWitness {
                degree: k,
                simplex: s,
                vertices: base.simplex(k, s).to_vec(),
                child_integrals: xs.clone(),
                pair,
                relation,
                multiplier: common_denominator(&xs, MAX_COEFF, PRECISION),
            };
            if xs.len() == 1 {
                if common_denominator(&xs, MAX_COEFF, PRECISION).is_some() {
                    return IntegralityCheck {
                        status: IntegralityStatus::Fail,
                        witness: Some(witness((0, 0), (1, 1))),
                        pairs_tested,
                        max_coeff: MAX_COEFF,
                    };
                }
                continue;
            }
            for i in 0..xs.len() {
                for j in (i + 1)..xs.len() {
                    pairs_tested += 1;
                    if let Some(rel) = pairwise_relation(xs[i], xs[j], MAX_COEFF, PRECISION) {
                        return IntegralityCheck {
                            status: IntegralityStatus::Fail,
                            witness: Some(witness((i, j), rel)),
                            pairs_tested,
                            max_coeff: MAX_COEFF,
                        };
                    }
                }
            }
        }
    }
    IntegralityCheck {
        status: if pairs_tested == 0 { IntegralityStatus::Pass } else { IntegralityStatus::HeuristicPass },
        witness: None,
        pairs_tested,
        max_coeff: MAX_COEFF,
    }
}

fn de_rham(base: &SimplicialComplex, fine: &SimplicialComplex, w: &[Mat], fine_d: &[Mat]) -> Result<Vec<DeRhamRow>> {
    let fine_top = Topology::compute(fine)?;
    let n = base.dim();
    let mut rows = Vec::with_capacity(n + 1);
    for k in 0..=n {
        // d on E^k, seen inside C^{k+1}(L′).
        let dk = &fine_d[k] * &w[k];
        let closed = null_space(&dk, RANK_TOL);
        let exact_rank = if k == 0 { 0 } else { numerical_rank(&(&fine_d[k - 1] * &w[k - 1]), RANK_TOL) };
        let dim_e = closed.ncols() - exact_rank;
        let rank_next = if k < n { rank_mod_p(fine.boundary(k + 1)?) } else { 0 };
        let rank_here = if k > 0 { rank_mod_p(fine.boundary(k)?) } else { 0 };
        let dim_f = fine.count(k) - rank_next - rank_here;
        let cycles = &fine_top.degree(k)?.cycles;
        let z = Mat::from_fn(cycles.len(), fine.count(k), |r, c| cycles[r][c] as f64);
        let periods = z * &w[k] * closed;
        let period_rank = numerical_rank(&periods, RANK_TOL);
        rows.push(DeRhamRow { degree: k, dim_e, dim_f, period_rank, passed: dim_e == dim_f && period_rank == dim_e });
    }
    Ok(rows)
}

/// Checks the model axioms on `base` and its direct subdivision `fine`.
///
/// The integrality axiom is tested in degrees `≥ 1` only: in degree 0 the
/// constant function has integral values on every vertex of any subdivision.
pub fn verify_model(base: &Arc<SimplicialComplex>, fine: &SimplicialComplex, seed: Option<u64>) -> Result<ModelReport> {
    let link = fine.parent().ok_or(Error::NoParentLink)?;
    if !Arc::ptr_eq(&link.parent, base) {
        return Err(Error::NoParentLink);
    }
    let n = base.dim();
    let w: Vec<Mat> = (0..=n).map(|k| embedding_matrix(fine, k).map(|m| m.to_dense())).collect::<Result<_>>()?;
    let fine_d: Vec<Mat> = (0..=n).map(|k| fine.coboundary(k).to_f64().to_dense()).collect();
    let freeness_witness = freeness(fine)?;
    let ranks: Vec<(usize, usize)> = w.iter().map(|m| (numerical_rank(m, RANK_TOL), m.ncols())).collect();
    let pairing = PairingCheck {
        passed: ranks.iter().all(|(r, c)| r == c),
        min_singular_ratio: w.iter().map(singular_ratio).fold(f64::INFINITY, f64::min),
        ranks,
    };
    let mut stokes = 0.0f64;
    for k in 0..n {
        let base_d = base.coboundary(k).to_f64().to_dense();
        stokes = stokes.max(max_abs(&(&fine_d[k] * &w[k] - &w[k + 1] * base_d)));
    }
    Ok(ModelReport {
        seed,
        freeness: freeness_witness.is_none(),
        freeness_witness,
        pairing,
        integrality: integrality(base, fine, &w),
        stokes,
        de_rham: de_rham(base, fine, &w, &fine_d)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{barycentric_subdivide, fixtures, perturbed_subdivide};

    fn seeded(x: SimplicialComplex, seed: u64) -> ModelReport {
        let base = Arc::new(x);
        let fine = perturbed_subdivide(&base, seed, 0.25).unwrap();
        verify_model(&base, &fine, Some(seed)).unwrap()
    }

    #[test]
    fn perturbed_pairs_form_models() {
        for (x, betti) in [
            (fixtures::cycle(3), alloc::vec![1, 1]),
            (fixtures::torus7(), alloc::vec![1, 2, 1]),
            (fixtures::tetrahedron_boundary(), alloc::vec![1, 0, 1]),
        ] {
            let r = seeded(x, 11);
            assert!(r.passed(), "{r:?}");
            assert_eq!(r.integrality.status, IntegralityStatus::HeuristicPass);
            assert!(r.stokes <= STOKES_TOLERANCE);
            assert_eq!(r.de_rham.iter().map(|d| d.dim_e).collect::<Vec<_>>(), betti);
        }
    }

    #[test]
    fn midpoint_subdivision_violates_integrality() {
        let base = Arc::new(fixtures::unit_edge());
        let fine = barycentric_subdivide(&base).unwrap();
        let r = verify_model(&base, &fine, None).unwrap();
        assert!(!r.passed());
        assert_eq!(r.integrality.status, IntegralityStatus::Fail);
        let w = r.integrality.witness.unwrap();
        assert_eq!(w.multiplier, Some(2));
        assert_eq!(w.child_integrals, alloc::vec![0.5, 0.5]);
        assert!(r.freeness && r.pairing.passed && r.stokes <= STOKES_TOLERANCE);
    }

    #[test]
    fn report_is_reproducible() {
        assert_eq!(seeded(fixtures::torus7(), 5), seeded(fixtures::torus7(), 5));
    }

    #[test]
    fn unrelated_subdivision_is_rejected() {
        let base = Arc::new(fixtures::cycle(3));
        let other = Arc::new(fixtures::cycle(3));
        let fine = perturbed_subdivide(&other, 1, 0.2).unwrap();
        assert_eq!(verify_model(&base, &fine, None).unwrap_err(), Error::NoParentLink);
    }
}
