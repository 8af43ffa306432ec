use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec::Vec;

use super::{base_coordinates, factorial, sign_of, subsets, term_integral, Cochain, Scalar};
use crate::complex::{sort_with_parity, SimplicialComplex};
use crate::{Error, Result};

/// One term `coeff · μ_a · dμ_{w₀} ∧ … ∧ dμ_{w_{k−1}}` in the barycentric
/// coordinates of a top simplex (`a` absent for a constant coefficient).
/// Indices are local positions in the top simplex's sorted vertex list.
#[derive(Clone, Debug, PartialEq)]
pub struct Term<T> {
    pub coeff: T,
    pub monomial: Option<usize>,
    pub wedge: Vec<usize>,
}

/// A piecewise polynomial form, stored symbolically on each top simplex of
/// its base complex.
#[derive(Clone, Debug)]
pub struct WhitneyForm<T> {
    degree: usize,
    base: Arc<SimplicialComplex>,
    pieces: Vec<Vec<Term<T>>>,
}

/// The Whitney form `Wτ` of a cochain on `base`.
pub fn whitney<T: Scalar>(base: &Arc<SimplicialComplex>, tau: &Cochain<T>) -> Result<WhitneyForm<T>> {
    let k = tau.degree;
    let n = base.dim();
    if k > n {
        return Err(Error::DegreeOutOfRange { degree: k, max: n });
    }
    if tau.values.len() != base.count(k) {
        return Err(Error::Shape(alloc::format!("cochain has {} values, degree {k} has {}", tau.values.len(), base.count(k))));
    }
    let kf = factorial::<T>(k);
    let faces = subsets(n + 1, k + 1);
    let mut pieces = Vec::with_capacity(base.count(n));
    for top in base.simplices(n) {
        let mut terms = BTreeMap::<(Option<usize>, Vec<usize>), T>::new();
        for f in &faces {
            let global: Vec<usize> = f.iter().map(|&l| top[l]).collect();
            let idx = base.find(&global).expect("faces of a top simplex are present");
            let c = tau.values[idx].clone();
            if c.is_zero() {
                continue;
            }
            let c = c * kf.clone() * sign_of::<T>(base.orientation(k, idx));
            for i in 0..=k {
                let wedge: Vec<usize> = f.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &v)| v).collect();
                let ci = if i % 2 == 0 { c.clone() } else { -c.clone() };
                let e = terms.entry((Some(f[i]), wedge)).or_insert_with(T::zero);
                *e = e.clone() + ci;
            }
        }
        pieces.push(collect_terms(terms));
    }
    Ok(WhitneyForm { degree: k, base: base.clone(), pieces })
}

fn collect_terms<T: Scalar>(terms: BTreeMap<(Option<usize>, Vec<usize>), T>) -> Vec<Term<T>> {
    terms.into_iter().filter(|(_, c)| !c.is_zero()).map(|((monomial, wedge), coeff)| Term { coeff, monomial, wedge }).collect()
}

impl<T: Scalar> WhitneyForm<T> {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn base(&self) -> &Arc<SimplicialComplex> {
        &self.base
    }

    /// Terms on top simplex `t`.
    pub fn piece(&self, t: usize) -> &[Term<T>] {
        &self.pieces[t]
    }

    /// Exterior derivative, computed symbolically.
    pub fn d(&self) -> WhitneyForm<T> {
        let pieces = self
            .pieces
            .iter()
            .map(|terms| {
                let mut out = BTreeMap::<(Option<usize>, Vec<usize>), T>::new();
                for t in terms {
                    let Some(a) = t.monomial else { continue };
                    if t.wedge.contains(&a) {
                        continue;
                    }
                    let mut raw = Vec::with_capacity(t.wedge.len() + 1);
                    raw.push(a);
                    raw.extend_from_slice(&t.wedge);
                    let (sorted, parity) = sort_with_parity(&raw);
                    let e = out.entry((None, sorted)).or_insert_with(T::zero);
                    *e = e.clone() + t.coeff.clone() * sign_of::<T>(parity);
                }
                collect_terms(out)
            })
            .collect();
        WhitneyForm { degree: self.degree + 1, base: self.base.clone(), pieces }
    }

    fn top_lookup(&self) -> BTreeMap<Vec<usize>, usize> {
        let n = self.base.dim();
        let mut map = BTreeMap::new();
        for (t, top) in self.base.simplices(n).enumerate() {
            for m in 1..=n + 1 {
                for f in subsets(n + 1, m) {
                    map.entry(f.iter().map(|&l| top[l]).collect()).or_insert(t);
                }
            }
        }
        map
    }

    fn integrate_with(&self, x: &SimplicialComplex, coords: &[Vec<(usize, T)>], tops: &BTreeMap<Vec<usize>, usize>, s: usize) -> Result<T> {
        let k = self.degree;
        let tuple = x.simplex(k, s);
        let mut carrier: Vec<usize> = tuple.iter().flat_map(|&v| coords[v].iter().map(|&(b, _)| b)).collect();
        carrier.sort_unstable();
        carrier.dedup();
        let t = *tops.get(&carrier).ok_or_else(|| Error::InvalidInput("simplex is not contained in a top simplex of the base".into()))?;
        let top = self.base.simplex(self.base.dim(), t);
        let pts: Vec<Vec<T>> = tuple
            .iter()
            .map(|&v| {
                let mut p = alloc::vec![T::zero(); top.len()];
                for (b, w) in &coords[v] {
                    let l = top.iter().position(|q| q == b).expect("carrier lies in the top simplex");
                    p[l] = w.clone();
                }
                p
            })
            .collect();
        let mut acc = T::zero();
        for term in &self.pieces[t] {
            acc = acc + term.coeff.clone() * term_integral(&pts, term.monomial, &term.wedge);
        }
        Ok(acc * sign_of::<T>(x.orientation(k, s)))
    }

    /// `∫_c w` for a chain `c` on `x`, where `x` is the base or descends
    /// from it through subdivisions.
    pub fn integrate(&self, x: &SimplicialComplex, degree: usize, chain: &[T]) -> Result<T> {
        if degree != self.degree {
            return Err(Error::DegreeMismatch { expected: self.degree, found: degree });
        }
        if chain.len() != x.count(degree) {
            return Err(Error::Shape(alloc::format!("chain has {} entries, expected {}", chain.len(), x.count(degree))));
        }
        let coords = base_coordinates::<T>(x, &self.base)?;
        let tops = self.top_lookup();
        let mut acc = T::zero();
        for (s, c) in chain.iter().enumerate() {
            if !c.is_zero() {
                acc = acc + c.clone() * self.integrate_with(x, &coords, &tops, s)?;
            }
        }
        Ok(acc)
    }

    /// The de Rham map: integrate over every `k`-simplex of `x`.
    pub fn de_rham_map(&self, x: &SimplicialComplex) -> Result<Cochain<T>> {
        if self.degree > x.dim() {
            return Err(Error::DegreeOutOfRange { degree: self.degree, max: x.dim() });
        }
        let coords = base_coordinates::<T>(x, &self.base)?;
        let tops = self.top_lookup();
        let values = (0..x.count(self.degree)).map(|s| self.integrate_with(x, &coords, &tops, s)).collect::<Result<_>>()?;
        Ok(Cochain { degree: self.degree, values })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{barycentric_subdivide, fixtures, perturbed_subdivide};
    use alloc::vec;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_cochain(x: &SimplicialComplex, k: usize, rng: &mut ChaCha8Rng) -> Cochain<f64> {
        Cochain { degree: k, values: (0..x.count(k)).map(|_| rng.random_range(-1.0..1.0)).collect() }
    }

    #[test]
    fn vertex_form_is_the_hat_function() {
        let base = Arc::new(fixtures::unit_edge());
        let w = whitney(&base, &Cochain::<f64>::elementary(&base, 0, 0)).unwrap();
        assert_eq!(w.piece(0), &[Term { coeff: 1.0, monomial: Some(0), wedge: vec![] }]);
    }

    #[test]
    fn edge_form_is_ds() {
        let base = Arc::new(fixtures::unit_edge());
        let w = whitney(&base, &Cochain::<f64>::elementary(&base, 1, 0)).unwrap();
        // μ₀ dμ₁ − μ₁ dμ₀; on the edge dμ₀ = −dμ₁, so the density is μ₀ + μ₁ = 1.
        assert_eq!(
            w.piece(0),
            &[Term { coeff: 1.0, monomial: Some(0), wedge: vec![1] }, Term { coeff: -1.0, monomial: Some(1), wedge: vec![0] }]
        );
        let sd = barycentric_subdivide(&base).unwrap();
        let r = w.de_rham_map(&sd).unwrap();
        assert!(r.values.iter().all(|v| (v - 0.5).abs() < 1e-15));
    }

    #[test]
    fn top_form_integrates_to_one() {
        let base = Arc::new(fixtures::tetrahedron_boundary());
        for t in 0..4 {
            let w = whitney(&base, &Cochain::<f64>::elementary(&base, 2, t)).unwrap();
            let mut e = vec![0.0; 4];
            e[t] = 1.0;
            assert!((w.integrate(&base, 2, &e).unwrap() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn de_rham_inverts_whitney_on_the_base() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for x in [fixtures::cycle(5), fixtures::torus7(), fixtures::tetrahedron_boundary()] {
            let base = Arc::new(x);
            for k in 0..=base.dim() {
                let tau = random_cochain(&base, k, &mut rng);
                let r = whitney(&base, &tau).unwrap().de_rham_map(&base).unwrap();
                let err = r.values.iter().zip(&tau.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                assert!(err <= 1e-12, "degree {k}: {err}");
            }
        }
    }

    #[test]
    fn rational_round_trip_is_exact() {
        let base = Arc::new(fixtures::torus7());
        let q = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
        for k in 0..=2 {
            let tau = Cochain { degree: k, values: (0..base.count(k)).map(|i| q(i as i64 * 7 - 11, 3 + i as i64)).collect() };
            let r = whitney(&base, &tau).unwrap().de_rham_map(&base).unwrap();
            assert_eq!(r, tau);
        }
    }

    #[test]
    fn whitney_and_de_rham_commute_with_d() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let base = Arc::new(fixtures::torus7());
        let child = perturbed_subdivide(&base, 2, 0.3).unwrap();
        for k in 0..2 {
            let tau = random_cochain(&base, k, &mut rng);
            let w = whitney(&base, &tau).unwrap();
            let lhs = whitney(&base, &tau.d(&base)).unwrap().de_rham_map(&child).unwrap();
            let rhs = w.d().de_rham_map(&child).unwrap();
            let drw = w.de_rham_map(&child).unwrap().d(&child);
            for ((a, b), c) in lhs.values.iter().zip(&rhs.values).zip(&drw.values) {
                assert!((a - b).abs() < 1e-12 && (a - c).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn stokes_on_the_base() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let base = Arc::new(fixtures::tetrahedron_boundary());
        let tau = random_cochain(&base, 1, &mut rng);
        let w = whitney(&base, &tau).unwrap();
        for s in 0..base.count(2) {
            let mut e = vec![0.0; base.count(2)];
            e[s] = 1.0;
            let bd: Vec<f64> = base.boundary(2).unwrap().to_f64().mul_vec(&e);
            let lhs = w.integrate(&base, 1, &bd).unwrap();
            let rhs = w.d().integrate(&base, 2, &e).unwrap();
            assert!((lhs - rhs).abs() < 1e-13);
        }
    }

    #[test]
    fn children_add_up_to_the_parent_value() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let base = Arc::new(fixtures::torus7());
        let child = Arc::new(perturbed_subdivide(&base, 4, 0.25).unwrap());
        let grand = barycentric_subdivide(&child).unwrap();
        for k in 0..=2 {
            let tau = random_cochain(&base, k, &mut rng);
            let r = whitney(&base, &tau).unwrap().de_rham_map(&grand).unwrap();
            let sd1 = crate::exact::subdivision_chain_map(&child, k).unwrap();
            let sd2 = crate::exact::subdivision_chain_map(&grand, k).unwrap();
            let sum = sd1.transpose().to_f64().mul_vec(&sd2.transpose().to_f64().mul_vec(&r.values));
            for (a, b) in sum.iter().zip(&tau.values) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn integrate_checks_degree_and_ancestry() {
        let base = Arc::new(fixtures::cycle(4));
        let w = whitney(&base, &Cochain::<f64>::elementary(&base, 1, 0)).unwrap();
        assert_eq!(w.integrate(&base, 0, &[0.0; 4]), Err(Error::DegreeMismatch { expected: 1, found: 0 }));
        let other = fixtures::cycle(4);
        assert_eq!(w.integrate(&other, 1, &[0.0; 4]), Err(Error::NoParentLink));
    }
}
