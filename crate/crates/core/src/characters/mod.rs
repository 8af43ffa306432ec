//! The Cheeger–Simons model `(E^•(L, L′), I_•(L′), ∫)` of a complex `L` and a
//! subdivision `L′`, its differential characters, and their spark
//! representatives.
//!
//! Characters are held in coordinates `(z, τ, c)`: a point of the harmonic
//! torus, a coexact cochain on `L`, and an integral class on `L′`. Everything
//! that needs the character as a function on cycles of `L′` goes through a
//! fixed real lift of that function, built once per class generator.

mod coords;
mod grid;
mod model;

use alloc::sync::Arc;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::complex::{perturbed_subdivide, SimplicialComplex};
use crate::exact::Topology;
use crate::hodge::{HodgeComplex, HodgeOptions};
use crate::linalg::{lstsq_min_norm, mat_vec, max_abs_slice, Mat};
use crate::whitney::embedding_matrix;
use crate::{Error, Result};

pub use coords::{CharacterCoords, CharacterModel, EquivalenceCertificate, SparkTriple};
pub use grid::{exact_sequence_report, grid_check, ExactSequenceReport, GridReport, GroupShape};
pub use model::{
    verify_model, DeRhamRow, IntegralityCheck, IntegralityStatus, IntegralityWitness, ModelReport, PairingCheck, STOKES_TOLERANCE,
};

/// Distance to the nearest integer, `|x|_{ℝ/ℤ}`.
pub fn circle_distance(x: f64) -> f64 {
    let r = x - x.floor();
    r.min(1.0 - r)
}

/// Representative of `x mod 1` in `[0, 1)`.
pub fn wrap(x: f64) -> f64 {
    let r = x - x.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// A complex, a direct subdivision of it, and the data shared by every
/// character computation on the pair.
#[derive(Clone, Debug)]
pub struct CsTriangulation {
    fine: Arc<SimplicialComplex>,
    hodge: HodgeComplex,
    fine_topology: Topology,
    embeddings: Vec<Mat>,
    fine_d: Vec<Mat>,
    seed: Option<u64>,
}

impl CsTriangulation {
    /// `fine` must have been built from exactly this `base`.
    pub fn new(base: Arc<SimplicialComplex>, fine: Arc<SimplicialComplex>, options: HodgeOptions) -> Result<Self> {
        let link = fine.parent().ok_or(Error::NoParentLink)?;
        if !Arc::ptr_eq(&link.parent, &base) {
            return Err(Error::NoParentLink);
        }
        let topology = Topology::compute(&base)?;
        let fine_topology = topology.transport(&fine)?;
        let hodge = HodgeComplex::new(base, topology, options)?;
        let n = fine.dim();
        let embeddings = (0..=n).map(|k| embedding_matrix(&fine, k).map(|m| m.to_dense())).collect::<Result<_>>()?;
        let fine_d = (0..=n).map(|k| fine.coboundary(k).to_f64().to_dense()).collect();
        Ok(Self { fine, hodge, fine_topology, embeddings, fine_d, seed: None })
    }

    /// Pairs `base` with its seeded perturbed barycentric subdivision.
    pub fn perturbed(base: Arc<SimplicialComplex>, seed: u64, scale: f64, options: HodgeOptions) -> Result<Self> {
        let fine = Arc::new(perturbed_subdivide(&base, seed, scale)?);
        let mut cs = Self::new(base, fine, options)?;
        cs.seed = Some(seed);
        Ok(cs)
    }

    pub fn base(&self) -> &Arc<SimplicialComplex> {
        self.hodge.complex()
    }

    pub fn fine(&self) -> &Arc<SimplicialComplex> {
        &self.fine
    }

    pub fn hodge(&self) -> &HodgeComplex {
        &self.hodge
    }

    pub fn base_topology(&self) -> &Topology {
        self.hodge.topology()
    }

    pub fn fine_topology(&self) -> &Topology {
        &self.fine_topology
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn dim(&self) -> usize {
        self.fine.dim()
    }

    /// Dense `W′` in degree `k`.
    pub fn embedding(&self, k: usize) -> &Mat {
        &self.embeddings[k]
    }

    /// Dense coboundary of `L′` in degree `k`.
    pub fn fine_d(&self, k: usize) -> &Mat {
        &self.fine_d[k]
    }

    /// `W′x` for a cochain `x` on the base.
    pub fn embed(&self, k: usize, x: &[f64]) -> Vec<f64> {
        mat_vec(&self.embeddings[k], x)
    }

    /// Largest entry of `v − d y` for the least-squares `y`; zero exactly
    /// when the `k`-cochain `v` on `L′` is a coboundary.
    pub fn exactness_residual(&self, k: usize, v: &[f64]) -> f64 {
        if k == 0 {
            return max_abs_slice(v);
        }
        let d = &self.fine_d[k - 1];
        let rhs = Mat::from_column_slice(v.len(), 1, v);
        let y = lstsq_min_norm(d, &rhs, 1e-12);
        let r = rhs - d * y;
        r.abs().max()
    }
}
