use alloc::vec::Vec;

use super::{elementary_integral, sign_of, subsets, Cochain, Scalar};
use crate::complex::SimplicialComplex;
use crate::linalg::Csr;
use crate::{Error, Result};

/// Entries `(s, σ, ∫_s W_σ)` of the embedding `W′ : C^k(parent) → C^k(child)`
/// for a direct subdivision `child`.
pub fn embedding_triplets<T: Scalar>(child: &SimplicialComplex, k: usize) -> Result<Vec<(usize, usize, T)>> {
    if k > child.dim() {
        return Err(Error::DegreeOutOfRange { degree: k, max: child.dim() });
    }
    let link = child.parent().ok_or(Error::NoParentLink)?;
    let parent = &link.parent;
    let support = T::supports(link)?;
    let mut out = Vec::new();
    for (s, tuple) in child.simplices(k).enumerate() {
        let (cd, c) = link.carrier[k][s];
        let carrier = parent.simplex(cd, c);
        let pts: Vec<Vec<T>> = tuple
            .iter()
            .map(|&v| {
                let mut p = alloc::vec![T::zero(); carrier.len()];
                for (b, w) in &support[v] {
                    let l = carrier.iter().position(|q| q == b).expect("support lies in the carrier");
                    p[l] = w.clone();
                }
                p
            })
            .collect();
        let so = sign_of::<T>(child.orientation(k, s));
        for face in subsets(carrier.len(), k + 1) {
            let v = elementary_integral(&pts, &face);
            if v.is_zero() {
                continue;
            }
            let global: Vec<usize> = face.iter().map(|&l| carrier[l]).collect();
            let sigma = parent.find(&global).expect("faces of the carrier are present");
            out.push((s, sigma, v * so.clone() * sign_of::<T>(parent.orientation(k, sigma))));
        }
    }
    Ok(out)
}

/// `W′` in degree `k` as a sparse `n′_k × n_k` matrix.
pub fn embedding_matrix(child: &SimplicialComplex, k: usize) -> Result<Csr> {
    let link = child.parent().ok_or(Error::NoParentLink)?;
    let t = embedding_triplets::<f64>(child, k)?;
    Ok(Csr::from_triplets(child.count(k), link.parent.count(k), t))
}

/// `W′τ` for a cochain on the parent of `child`.
pub fn embed<T: Scalar>(tau: &Cochain<T>, child: &SimplicialComplex) -> Result<Cochain<T>> {
    let t = embedding_triplets::<T>(child, tau.degree)?;
    let mut values = alloc::vec![T::zero(); child.count(tau.degree)];
    for (s, sigma, v) in t {
        values[s] = values[s].clone() + v * tau.values[sigma].clone();
    }
    Ok(Cochain { degree: tau.degree, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{barycentric_subdivide, build_complex_with, fixtures, perturbed_subdivide, BuildOptions};
    use crate::whitney::whitney;
    use alloc::sync::Arc;
    use alloc::vec;
    use num_rational::BigRational;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn split_unit_edge_embeds_as_t_and_one_minus_t() {
        let base = Arc::new(fixtures::unit_edge());
        let child = perturbed_subdivide(&base, 17, 0.4).unwrap();
        let m = embedding_matrix(&child, 1).unwrap().to_dense();
        // Child edges are (0, 2) and (1, 2); vertex 2 is the split point.
        let t = child.vertex(2)[0];
        assert!((t - 0.5).abs() > 1e-6);
        assert!((m[(0, 0)] - t).abs() < 1e-15 && (m[(1, 0)] - (1.0 - t)).abs() < 1e-15);
        assert!(embed(&Cochain::<f64>::zero(&base, 1), &child).unwrap().values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn embedding_agrees_with_the_de_rham_map_of_whitney_forms() {
        let base = Arc::new(fixtures::torus7());
        let child = perturbed_subdivide(&base, 8, 0.3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for k in 0..=2 {
            let tau = Cochain { degree: k, values: (0..base.count(k)).map(|_| rng.random_range(-1.0..1.0)).collect() };
            let a = embed(&tau, &child).unwrap();
            let b = whitney(&base, &tau).unwrap().de_rham_map(&child).unwrap();
            for (x, y) in a.values.iter().zip(&b.values) {
                assert!((x - y).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn embedding_commutes_with_d_exactly_in_rational_mode() {
        let base = Arc::new(fixtures::tetrahedron_boundary());
        let child = barycentric_subdivide(&base).unwrap();
        for k in 0..2 {
            for i in 0..base.count(k) {
                let tau = Cochain::<BigRational>::elementary(&base, k, i);
                let lhs = embed(&tau, &child).unwrap().d(&child);
                let rhs = embed(&tau.d(&base), &child).unwrap();
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn embedding_needs_a_parent() {
        let v = vec![vec![0.0], vec![1.0]];
        let x = build_complex_with(&v, &[vec![0, 1]], &BuildOptions { allow_boundary: true, ..Default::default() }).unwrap();
        assert_eq!(embedding_matrix(&x, 1).unwrap_err(), Error::NoParentLink);
    }
}
