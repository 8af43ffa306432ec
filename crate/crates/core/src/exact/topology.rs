//! Integral topology of a complex in every degree, with explicit
//! representatives that can be carried down a chain of subdivisions.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use super::{quotient, subdivision_chain_map, unimodular_inverse, vertex_chain_map, IntegerMatrix};
use crate::complex::SimplicialComplex;
use crate::linalg::SparseInt;
use crate::{Error, Result};

/// Representatives for one degree `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct DegreeTopology {
    pub degree: usize,
    pub betti: usize,
    /// Free homology generators `z_j` (`k`-chains).
    pub cycles: Vec<Vec<i64>>,
    /// Integer cocycles `u_j` with `u_j(z_l) = δ_jl`.
    pub cocycles: Vec<Vec<i64>>,
    /// Orders of the torsion summands of `H^k`.
    pub torsion: Vec<u64>,
    /// Cocycles generating the torsion of `H^k`.
    pub torsion_cocycles: Vec<Vec<i64>>,
    /// `(k−1)`-cochains `x_i` with `δ x_i = torsion[i] · torsion_cocycles[i]`.
    pub torsion_primitives: Vec<Vec<i64>>,
    /// `k`-chains `w_i`: for a cocycle `r` with vanishing periods the torsion
    /// coordinate is `⟨w_i, r⟩ mod torsion[i]`.
    pub torsion_functionals: Vec<Vec<i64>>,
    /// Orders of the torsion summands of `H_k`.
    pub homology_torsion: Vec<u64>,
}

/// Coordinates of a cohomology class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassCoords {
    pub free: Vec<i64>,
    pub torsion: Vec<u64>,
}

/// Per-degree representatives of a complex.
#[derive(Clone, Debug, PartialEq)]
pub struct Topology {
    f_vector: Vec<usize>,
    degrees: Vec<DegreeTopology>,
}

fn big_to_i64(v: &[BigInt]) -> Result<Vec<i64>> {
    v.iter().map(|x| x.to_i64().ok_or_else(|| Error::InvalidInput("representative exceeds i64".into()))).collect()
}

fn dot(a: &[i64], b: &[i64]) -> i128 {
    a.iter().zip(b).map(|(&x, &y)| i128::from(x) * i128::from(y)).sum()
}

fn dense_boundary(x: &SimplicialComplex, k: usize) -> Result<IntegerMatrix> {
    if k == 0 {
        Ok(IntegerMatrix::zeros(0, x.count(0)))
    } else if k == x.dim() + 1 {
        Ok(IntegerMatrix::zeros(x.count(x.dim()), 0))
    } else {
        Ok(IntegerMatrix::from_sparse(x.boundary(k)?))
    }
}

impl Topology {
    /// Computes representatives by Smith normal form.
    pub fn compute(x: &SimplicialComplex) -> Result<Self> {
        let n = x.dim();
        let mut degrees = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let bk = dense_boundary(x, k)?;
            let bk1 = dense_boundary(x, k + 1)?;
            let hom = quotient(&bk1, &bk)?;
            let coh = quotient(&bk.transpose(), &bk1.transpose())?;
            let f = hom.free_rank();
            if coh.free_rank() != f {
                return Err(Error::ExactnessViolation { node: alloc::format!("rank mismatch in degree {k}") });
            }
            let cycles: Vec<Vec<i64>> = (0..f).map(|j| big_to_i64(&hom.free.column(j))).collect::<Result<_>>()?;
            let gens: Vec<Vec<BigInt>> = (0..f).map(|j| coh.free.column(j)).collect();
            // Pairing of cohomology generators with homology generators.
            let mut pm = IntegerMatrix::zeros(f, f);
            for i in 0..f {
                for l in 0..f {
                    let v: BigInt = gens[i].iter().zip(&cycles[l]).map(|(a, &b)| a * b).sum();
                    pm.set(i, l, v);
                }
            }
            let inv = unimodular_inverse(&pm)
                .ok_or_else(|| Error::ExactnessViolation { node: alloc::format!("pairing is not unimodular in degree {k}") })?;
            let m = x.count(k);
            let mut cocycles = Vec::with_capacity(f);
            for j in 0..f {
                let mut u = vec![BigInt::from(0); m];
                for (i, g) in gens.iter().enumerate() {
                    let c = inv.get(j, i);
                    for (ue, ge) in u.iter_mut().zip(g) {
                        *ue += c * ge;
                    }
                }
                cocycles.push(big_to_i64(&u)?);
            }
            let tidx = coh.torsion_indices();
            let torsion = tidx
                .iter()
                .map(|&i| coh.diag[i].to_u64().ok_or_else(|| Error::InvalidInput("torsion order exceeds u64".into())))
                .collect::<Result<_>>()?;
            let torsion_cocycles = tidx.iter().map(|&i| big_to_i64(&coh.torsion_generator(i))).collect::<Result<_>>()?;
            let torsion_primitives = tidx.iter().map(|&i| big_to_i64(&coh.torsion_primitive(i))).collect::<Result<_>>()?;
            let torsion_functionals = tidx.iter().map(|&i| big_to_i64(&coh.u.row(i))).collect::<Result<_>>()?;
            let homology_torsion = hom
                .torsion_orders()
                .iter()
                .map(|d| d.to_u64().ok_or_else(|| Error::InvalidInput("torsion order exceeds u64".into())))
                .collect::<Result<_>>()?;
            degrees.push(DegreeTopology {
                degree: k,
                betti: f,
                cycles,
                cocycles,
                torsion,
                torsion_cocycles,
                torsion_primitives,
                torsion_functionals,
                homology_torsion,
            });
        }
        Ok(Self { f_vector: x.f_vector(), degrees })
    }

    pub fn dim(&self) -> usize {
        self.degrees.len() - 1
    }

    pub fn f_vector(&self) -> &[usize] {
        &self.f_vector
    }

    pub fn degree(&self, k: usize) -> Result<&DegreeTopology> {
        self.degrees.get(k).ok_or(Error::DegreeOutOfRange { degree: k, max: self.dim() })
    }

    pub fn bettis(&self) -> Vec<usize> {
        self.degrees.iter().map(|d| d.betti).collect()
    }

    /// Integer cocycle representing the `j`-th free generator of `H^k`.
    pub fn cocycle_lift(&self, k: usize, j: usize) -> Result<&[i64]> {
        let d = self.degree(k)?;
        d.cocycles.get(j).map(Vec::as_slice).ok_or(Error::IndexOutOfRange { index: j, len: d.betti })
    }

    /// Carries all representatives to `child`, a subdivision of the complex
    /// these were computed on: chains go forward by subdivision, cochains are
    /// pulled back along the vertex map.
    pub fn transport(&self, child: &SimplicialComplex) -> Result<Self> {
        let link = child.parent().ok_or(Error::NoParentLink)?;
        if link.parent.f_vector() != self.f_vector {
            return Err(Error::InvalidInput("topology was computed on a different complex".into()));
        }
        let n = self.dim();
        let sd: Vec<SparseInt> = (0..=n).map(|k| subdivision_chain_map(child, k)).collect::<Result<_>>()?;
        let phi_t: Vec<SparseInt> = (0..=n).map(|k| vertex_chain_map(child, k).map(|m| m.transpose())).collect::<Result<_>>()?;
        let degrees = self
            .degrees
            .iter()
            .map(|d| {
                let k = d.degree;
                let fwd = |c: &Vec<i64>| sd[k].mul_vec(c);
                let back = |c: &Vec<i64>| phi_t[k].mul_vec(c);
                DegreeTopology {
                    degree: k,
                    betti: d.betti,
                    cycles: d.cycles.iter().map(fwd).collect(),
                    cocycles: d.cocycles.iter().map(back).collect(),
                    torsion: d.torsion.clone(),
                    torsion_cocycles: d.torsion_cocycles.iter().map(back).collect(),
                    torsion_primitives: d.torsion_primitives.iter().map(|c| phi_t[k - 1].mul_vec(c)).collect(),
                    torsion_functionals: d.torsion_functionals.iter().map(fwd).collect(),
                    homology_torsion: d.homology_torsion.clone(),
                }
            })
            .collect();
        Ok(Self { f_vector: child.f_vector(), degrees })
    }

    /// Class of an integer `k`-cocycle on the complex these representatives
    /// live on.
    pub fn class_of(&self, x: &SimplicialComplex, k: usize, cocycle: &[i64]) -> Result<ClassCoords> {
        let d = self.degree(k)?;
        if x.f_vector() != self.f_vector {
            return Err(Error::InvalidInput("topology belongs to a different complex".into()));
        }
        if cocycle.len() != x.count(k) {
            return Err(Error::Shape(alloc::format!("cochain of length {} in degree {k}", cocycle.len())));
        }
        let dr = x.coboundary(k).mul_vec(cocycle);
        if let Some(&bad) = dr.iter().find(|v| **v != 0) {
            return Err(Error::NotACycle { residual: bad });
        }
        let free: Vec<i64> = d
            .cycles
            .iter()
            .map(|z| i64::try_from(dot(z, cocycle)).map_err(|_| Error::InvalidInput("period exceeds i64".into())))
            .collect::<Result<_>>()?;
        let mut rest: Vec<i128> = cocycle.iter().map(|&v| i128::from(v)).collect();
        for (u, &c) in d.cocycles.iter().zip(&free) {
            for (r, &ue) in rest.iter_mut().zip(u) {
                *r -= i128::from(c) * i128::from(ue);
            }
        }
        let torsion = d
            .torsion_functionals
            .iter()
            .zip(&d.torsion)
            .map(|(w, &ord)| {
                let s: i128 = w.iter().zip(&rest).map(|(&a, &b)| i128::from(a) * b).sum();
                s.rem_euclid(i128::from(ord)) as u64
            })
            .collect();
        Ok(ClassCoords { free, torsion })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{barycentric_subdivide, fixtures, perturbed_subdivide};
    use alloc::sync::Arc;

    fn check_duality(x: &SimplicialComplex, t: &Topology) {
        for k in 0..=x.dim() {
            let d = t.degree(k).unwrap();
            for (j, u) in d.cocycles.iter().enumerate() {
                assert!(x.coboundary(k).mul_vec(u).iter().all(|&v| v == 0), "u_{j} closed");
                for (l, z) in d.cycles.iter().enumerate() {
                    assert_eq!(dot(u, z), i128::from(j == l), "pairing ({j},{l}) in degree {k}");
                }
            }
            for z in &d.cycles {
                if k > 0 {
                    assert!(x.boundary(k).unwrap().mul_vec(z).iter().all(|&v| v == 0));
                }
            }
            for (i, t_i) in d.torsion_cocycles.iter().enumerate() {
                let dx = x.coboundary(k - 1).mul_vec(&d.torsion_primitives[i]);
                let want: Vec<i64> = t_i.iter().map(|&v| v * d.torsion[i] as i64).collect();
                assert_eq!(dx, want);
            }
        }
    }

    #[test]
    fn torus_and_sphere_representatives() {
        for x in [fixtures::torus7(), fixtures::tetrahedron_boundary(), fixtures::cycle(5)] {
            let t = Topology::compute(&x).unwrap();
            check_duality(&x, &t);
        }
    }

    #[test]
    fn torsion_class_coordinates_on_projective_plane() {
        let x = fixtures::rp2_6();
        let t = Topology::compute(&x).unwrap();
        check_duality(&x, &t);
        let d2 = t.degree(2).unwrap();
        assert_eq!(d2.torsion, vec![2]);
        assert_eq!(t.degree(1).unwrap().homology_torsion, vec![2]);
        let gen = &d2.torsion_cocycles[0];
        assert_eq!(t.class_of(&x, 2, gen).unwrap().torsion, vec![1]);
        let twice: Vec<i64> = gen.iter().map(|v| 2 * v).collect();
        assert_eq!(t.class_of(&x, 2, &twice).unwrap().torsion, vec![0]);
        // Any single top simplex generates the top cohomology of ℝP².
        let mut e = vec![0; x.count(2)];
        e[3] = 1;
        assert_eq!(t.class_of(&x, 2, &e).unwrap().torsion, vec![1]);
    }

    #[test]
    fn transport_preserves_pairings_and_classes() {
        let base = Arc::new(fixtures::rp2_6());
        let t0 = Topology::compute(&base).unwrap();
        let child = barycentric_subdivide(&base).unwrap();
        let t1 = t0.transport(&child).unwrap();
        check_duality(&child, &t1);
        let mut e = vec![0; child.count(2)];
        e[11] = 1;
        assert_eq!(t1.class_of(&child, 2, &e).unwrap().torsion, vec![1]);

        let torus = Arc::new(fixtures::torus7());
        let tt = Topology::compute(&torus).unwrap();
        let c1 = Arc::new(perturbed_subdivide(&torus, 1, 0.25).unwrap());
        let tt1 = tt.transport(&c1).unwrap();
        check_duality(&c1, &tt1);
        let c2 = barycentric_subdivide(&c1).unwrap();
        let tt2 = tt1.transport(&c2).unwrap();
        check_duality(&c2, &tt2);
        // Recomputing on the child gives the same ranks.
        assert_eq!(Topology::compute(&c1).unwrap().bettis(), tt1.bettis());
    }

    #[test]
    fn cocycle_lift_out_of_range() {
        let t = Topology::compute(&fixtures::tetrahedron_boundary()).unwrap();
        assert_eq!(t.cocycle_lift(1, 0), Err(Error::IndexOutOfRange { index: 0, len: 0 }));
        assert_eq!(t.cocycle_lift(2, 0).unwrap().len(), 4);
        assert!(matches!(t.cocycle_lift(3, 0), Err(Error::DegreeOutOfRange { .. })));
    }
}
