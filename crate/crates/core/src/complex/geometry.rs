use alloc::vec::Vec;

use nalgebra::DMatrix;
#[allow(unused_imports)]
use num_traits::Float;

use super::SimplicialComplex;

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Gram matrix `EᵀE` of the edge vectors `p_j − p_0`.
pub(crate) fn edge_gram(pts: &[&[f64]]) -> DMatrix<f64> {
    let k = pts.len() - 1;
    let mut g = DMatrix::zeros(k, k);
    for a in 0..k {
        for b in a..k {
            let v: f64 = (0..pts[0].len()).map(|c| (pts[a + 1][c] - pts[0][c]) * (pts[b + 1][c] - pts[0][c])).sum();
            g[(a, b)] = v;
            g[(b, a)] = v;
        }
    }
    g
}

/// `k`-volume of the simplex spanned by `k + 1` points in ℝᴺ.
pub(crate) fn simplex_volume_of(pts: &[&[f64]]) -> f64 {
    let k = pts.len() - 1;
    if k == 0 {
        return 1.0;
    }
    let det = edge_gram(pts).determinant();
    det.max(0.0).sqrt() / factorial(k)
}

/// Volume of an explicit simplex given as coordinate rows.
pub fn simplex_volume(pts: &[Vec<f64>]) -> f64 {
    let refs: Vec<&[f64]> = pts.iter().map(Vec::as_slice).collect();
    simplex_volume_of(&refs)
}

impl SimplicialComplex {
    pub(crate) fn points(&self, k: usize, i: usize) -> Vec<&[f64]> {
        self.simplex(k, i).iter().map(|&v| self.vertex(v)).collect()
    }

    /// Affine `k`-volume of simplex `(k, i)`.
    pub fn volume(&self, k: usize, i: usize) -> f64 {
        simplex_volume_of(&self.points(k, i))
    }

    pub fn volumes(&self, k: usize) -> Vec<f64> {
        (0..self.count(k)).map(|i| self.volume(k, i)).collect()
    }

    pub fn total_volume(&self) -> f64 {
        crate::linalg::compensated_sum(self.volumes(self.dim))
    }

    pub fn edge_length(&self, i: usize) -> f64 {
        let s = self.simplex(1, i);
        let (a, b) = (self.vertex(s[0]), self.vertex(s[1]));
        a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
    }

    /// Longest edge (Euclidean chord length).
    pub fn mesh(&self) -> f64 {
        (0..self.count(1)).map(|i| self.edge_length(i)).fold(0.0, f64::max)
    }

    /// `min vol(σ) / mesh^n` over top simplices.
    pub fn fullness(&self) -> f64 {
        let h = self.mesh().powi(self.dim as i32);
        self.volumes(self.dim).into_iter().fold(f64::INFINITY, f64::min) / h
    }

    /// Radius of the inscribed ball of simplex `(k, i)`, `k ≥ 1`.
    pub fn inradius(&self, k: usize, i: usize) -> f64 {
        let pts = self.points(k, i);
        let vol = simplex_volume_of(&pts);
        let facets: f64 = (0..=k)
            .map(|omit| {
                let f: Vec<&[f64]> = pts.iter().enumerate().filter(|&(j, _)| j != omit).map(|(_, p)| *p).collect();
                simplex_volume_of(&f)
            })
            .sum();
        k as f64 * vol / facets
    }

    pub fn barycenter(&self, k: usize, i: usize) -> Vec<f64> {
        let pts = self.points(k, i);
        let mut c = alloc::vec![0.0; self.embed];
        for p in &pts {
            for (ci, x) in c.iter_mut().zip(p.iter()) {
                *ci += x;
            }
        }
        c.iter_mut().for_each(|x| *x /= pts.len() as f64);
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{build_complex_with, fixtures, BuildOptions};
    use alloc::vec;

    #[test]
    fn equilateral_triangle_on_unit_circle_has_mesh_sqrt3() {
        let v: Vec<Vec<f64>> = (0..3)
            .map(|i| {
                let a = 2.0 * core::f64::consts::PI * i as f64 / 3.0;
                vec![a.cos(), a.sin()]
            })
            .collect();
        let x = crate::complex::build_complex(&v, &[vec![0, 1], vec![1, 2], vec![2, 0]]).unwrap();
        // Oracle: chord 2 sin(π/3).
        assert!((x.mesh() - 2.0 * (core::f64::consts::PI / 3.0).sin()).abs() < 1e-15);
    }

    #[test]
    fn unit_right_triangle_fullness_is_a_quarter() {
        let v = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        let opts = BuildOptions { allow_boundary: true, ..Default::default() };
        let x = build_complex_with(&v, &[vec![0, 1, 2]], &opts).unwrap();
        assert!((x.mesh() - 2f64.sqrt()).abs() < 1e-15);
        assert!((x.fullness() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn inradius_of_edge_is_half_length() {
        let x = fixtures::unit_edge();
        assert!((x.inradius(1, 0) - 0.5).abs() < 1e-15);
        let v = vec![vec![0.0, 0.0], vec![3.0, 0.0], vec![0.0, 4.0]];
        let opts = BuildOptions { allow_boundary: true, ..Default::default() };
        let t = build_complex_with(&v, &[vec![0, 1, 2]], &opts).unwrap();
        // 3-4-5 triangle: r = area / semiperimeter = 6 / 6.
        assert!((t.inradius(2, 0) - 1.0).abs() < 1e-14);
    }
}
