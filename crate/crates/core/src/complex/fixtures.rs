//! Small named complexes used throughout the tests and by the catalog.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;

use super::{build_complex, build_complex_with, BuildOptions, SimplicialComplex};

/// Regular `n`-gon inscribed in the circle of circumference 1.
pub fn cycle(n: usize) -> SimplicialComplex {
    assert!(n >= 3, "a cycle needs at least three vertices");
    let r = 1.0 / (2.0 * PI);
    let v: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let a = 2.0 * PI * i as f64 / n as f64;
            vec![r * a.cos(), r * a.sin()]
        })
        .collect();
    let t: Vec<Vec<usize>> = (0..n).map(|i| vec![i, (i + 1) % n]).collect();
    build_complex(&v, &t).expect("regular polygon is a valid circle")
}

/// Boundary of a regular tetrahedron inscribed in the unit sphere.
pub fn tetrahedron_boundary() -> SimplicialComplex {
    let s = 1.0 / 3f64.sqrt();
    let v = vec![vec![s, s, s], vec![s, -s, -s], vec![-s, s, -s], vec![-s, -s, s]];
    let t = vec![vec![0, 1, 2], vec![0, 1, 3], vec![0, 2, 3], vec![1, 2, 3]];
    build_complex(&v, &t).expect("tetrahedron boundary is a sphere")
}

/// Möbius' seven-vertex torus, triangles `{i, i+1, i+3}` and `{i, i+2, i+3}`
/// mod 7, placed on the Clifford torus in ℝ⁴ with vertex `i` at the angle
/// pair `(2πi/7, 6πi/7)`.
pub fn torus7() -> SimplicialComplex {
    let v: Vec<Vec<f64>> = (0..7)
        .map(|i| {
            let a = 2.0 * PI * i as f64 / 7.0;
            let b = 2.0 * PI * ((3 * i) % 7) as f64 / 7.0;
            vec![a.cos(), a.sin(), b.cos(), b.sin()]
        })
        .collect();
    let mut t = Vec::new();
    for i in 0..7 {
        t.push(vec![i, (i + 1) % 7, (i + 3) % 7]);
        t.push(vec![i, (i + 2) % 7, (i + 3) % 7]);
    }
    build_complex(&v, &t).expect("seven-vertex torus is valid")
}

/// Minimal six-vertex real projective plane (non-orientable, chain-level use
/// only), embedded generically in ℝ⁵.
pub fn rp2_6() -> SimplicialComplex {
    let v: Vec<Vec<f64>> = (0..6)
        .map(|i| {
            let x = i as f64;
            vec![x, x * x, x * x * x, x.powi(4), x.powi(5)]
        })
        .collect();
    let t = vec![
        vec![0, 1, 2],
        vec![0, 2, 3],
        vec![0, 3, 4],
        vec![0, 4, 5],
        vec![0, 5, 1],
        vec![1, 2, 4],
        vec![2, 3, 5],
        vec![3, 4, 1],
        vec![4, 5, 2],
        vec![5, 1, 3],
    ];
    build_complex_with(&v, &t, &BuildOptions { allow_non_orientable: true, ..Default::default() })
        .expect("six-vertex projective plane is a valid pseudo-manifold")
}

/// The segment `[0, 1]` (has boundary).
pub fn unit_edge() -> SimplicialComplex {
    build_complex_with(&[vec![0.0], vec![1.0]], &[vec![0, 1]], &BuildOptions { allow_boundary: true, ..Default::default() })
        .expect("unit edge")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_have_expected_shapes() {
        assert_eq!(cycle(8).f_vector(), vec![8, 8]);
        assert_eq!(torus7().f_vector(), vec![7, 21, 14]);
        assert_eq!(torus7().euler_characteristic(), 0);
        let p = rp2_6();
        assert_eq!(p.f_vector(), vec![6, 15, 10]);
        assert!(!p.is_oriented());
        assert!(p.is_closed());
        assert!(!unit_edge().is_closed());
    }

    #[test]
    fn cycle_has_unit_perimeter_in_the_limit() {
        let c = cycle(1000);
        let perimeter: f64 = (0..1000).map(|i| c.edge_length(i)).sum();
        assert!((perimeter - 1.0).abs() < 1e-5);
    }
}
