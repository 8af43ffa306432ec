use alloc::vec::Vec;

use nalgebra::DMatrix;

use super::{det, subsets};
use crate::complex::SimplicialComplex;
use crate::linalg::Mat;
use crate::{Error, Result};

/// Inner products `⟨dμ_i, dμ_j⟩` of the barycentric gradients of a simplex.
fn gradient_gram(x: &SimplicialComplex, top: &[usize]) -> Result<DMatrix<f64>> {
    let n = top.len() - 1;
    let p0 = x.vertex(top[0]);
    let e = DMatrix::from_fn(x.embed_dim(), n, |r, c| x.vertex(top[c + 1])[r] - p0[r]);
    let g = e.transpose() * &e;
    let ginv = g.cholesky().ok_or(Error::SingularGram { degree: n })?.inverse();
    let mut c = DMatrix::zeros(n, n + 1);
    for r in 0..n {
        c[(r, 0)] = -1.0;
        c[(r, r + 1)] = 1.0;
    }
    Ok(c.transpose() * ginv * c)
}

/// Local Gram matrix of the Whitney forms of the `k`-faces of top simplex
/// `t`: the global face indices and the `L²(t)` inner products in the
/// oriented basis.
pub fn top_gram(x: &SimplicialComplex, k: usize, t: usize) -> Result<(Vec<usize>, Mat)> {
    let n = x.dim();
    if k > n {
        return Err(Error::DegreeOutOfRange { degree: k, max: n });
    }
    let top = x.simplex(n, t);
    let s = gradient_gram(x, top)?;
    let vol = x.volume(n, t);
    let faces = subsets(n + 1, k + 1);
    let idx: Vec<usize> =
        faces.iter().map(|f| x.find(&f.iter().map(|&l| top[l]).collect::<Vec<_>>()).expect("face of a top simplex")).collect();
    let kf: f64 = (1..=k).map(|i| i as f64).product();
    let mass = |a: usize, b: usize| vol * if a == b { 2.0 } else { 1.0 } / ((n + 1) * (n + 2)) as f64;
    let minor = |rows: &[usize], cols: &[usize]| -> f64 { det(rows.iter().map(|&r| cols.iter().map(|&c| s[(r, c)]).collect()).collect()) };
    let m = faces.len();
    let mut out = Mat::zeros(m, m);
    for a in 0..m {
        for b in a..m {
            let (fa, fb) = (&faces[a], &faces[b]);
            let mut acc = 0.0;
            for i in 0..=k {
                let ra: Vec<usize> = fa.iter().enumerate().filter(|&(q, _)| q != i).map(|(_, &v)| v).collect();
                for j in 0..=k {
                    let rb: Vec<usize> = fb.iter().enumerate().filter(|&(q, _)| q != j).map(|(_, &v)| v).collect();
                    let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                    acc += sign * mass(fa[i], fb[j]) * minor(&ra, &rb);
                }
            }
            let o = f64::from(x.orientation(k, idx[a]) * x.orientation(k, idx[b]));
            let v = kf * kf * acc * o;
            out[(a, b)] = v;
            out[(b, a)] = v;
        }
    }
    Ok((idx, out))
}

/// Global Gram matrix `M_k` of Whitney `k`-forms on `x`.
pub fn gram_matrix(x: &SimplicialComplex, k: usize) -> Result<Mat> {
    let nk = x.count(k);
    let mut m = Mat::zeros(nk, nk);
    for t in 0..x.count(x.dim()) {
        let (idx, local) = top_gram(x, k, t)?;
        for (a, &ia) in idx.iter().enumerate() {
            for (b, &ib) in idx.iter().enumerate() {
                m[(ia, ib)] += local[(a, b)];
            }
        }
    }
    Ok(m)
}

/// `⟨Wα, Wβ⟩` for two `k`-cochains on `x`.
pub fn inner_product(x: &SimplicialComplex, k: usize, alpha: &[f64], beta: &[f64]) -> Result<f64> {
    if alpha.len() != x.count(k) || beta.len() != x.count(k) {
        return Err(Error::Shape(alloc::format!("cochains of degree {k} need {} entries", x.count(k))));
    }
    Ok(crate::linalg::inner(&gram_matrix(x, k)?, alpha, beta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{build_complex_with, fixtures, perturbed_subdivide, BuildOptions};
    use crate::whitney::embedding_matrix;
    use alloc::sync::Arc;
    use alloc::vec;

    #[test]
    fn vertex_mass_matrix_on_a_right_triangle_pair() {
        let v = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]];
        let opts = BuildOptions { allow_boundary: true, ..Default::default() };
        let x = build_complex_with(&v, &[vec![0, 1, 2], vec![1, 2, 3]], &opts).unwrap();
        let m = gram_matrix(&x, 0).unwrap();
        // Classical P1 mass matrix: vol/12 · (2 on the diagonal, 1 off it), vol = 1/2.
        let per = |a: usize, b: usize| if a == b { 2.0 / 24.0 } else { 1.0 / 24.0 };
        let mut want = Mat::zeros(4, 4);
        for tri in [[0, 1, 2], [1, 2, 3]] {
            for &a in &tri {
                for &b in &tri {
                    want[(a, b)] += per(a, b);
                }
            }
        }
        assert!((m - want).abs().max() < 1e-15);
    }

    #[test]
    fn split_edge_one_forms_have_density_one_over_length() {
        let base = Arc::new(fixtures::unit_edge());
        let child = perturbed_subdivide(&base, 17, 0.4).unwrap();
        let m = gram_matrix(&child, 1).unwrap();
        let t = child.vertex(2)[0];
        assert!((m[(0, 0)] - 1.0 / t).abs() < 1e-12);
        assert!((m[(1, 1)] - 1.0 / (1.0 - t)).abs() < 1e-12);
        assert_eq!(m[(0, 1)], 0.0);
    }

    #[test]
    fn gram_matrices_are_symmetric_positive_definite() {
        for x in [fixtures::cycle(6), fixtures::torus7(), fixtures::tetrahedron_boundary()] {
            for k in 0..=x.dim() {
                let m = gram_matrix(&x, k).unwrap();
                assert!((&m - m.transpose()).abs().max() < 1e-14);
                assert!(m.clone().symmetric_eigenvalues().min() > 0.0);
            }
        }
    }

    #[test]
    fn gram_is_the_same_on_the_subdivision() {
        // Whitney spaces are affine invariant, so a coarse Whitney form is
        // reproduced exactly by the fine Whitney form of its integrals.
        let base = Arc::new(fixtures::torus7());
        let child = perturbed_subdivide(&base, 6, 0.3).unwrap();
        for k in 0..=2 {
            let w = embedding_matrix(&child, k).unwrap().to_dense();
            let fine = w.transpose() * gram_matrix(&child, k).unwrap() * &w;
            let coarse = gram_matrix(&base, k).unwrap();
            assert!((fine - &coarse).abs().max() < 1e-11 * coarse.abs().max(), "degree {k}");
        }
    }
}
