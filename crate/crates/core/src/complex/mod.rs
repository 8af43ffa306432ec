//! Oriented, piecewise-affine simplicial complexes embedded in ℝᴺ.
//!
//! Simplices of every degree are stored as sorted vertex tuples in
//! lexicographic order. Simplices below the top degree carry the orientation
//! of their sorted tuple; top simplices carry an explicit sign so that the
//! complex is globally oriented. Subdivisions remember their parent through a
//! [`ParentLink`].

mod build;
pub mod fixtures;
mod geometry;
pub mod relation;
mod subdivide;

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec::Vec;

use num_rational::BigRational;
#[allow(unused_imports)]
use num_traits::Float;

use crate::linalg::SparseInt;
use crate::{Error, Result};

pub(crate) use build::sort_with_parity;
pub use build::{build_complex, build_complex_with, BuildOptions};
pub use geometry::simplex_volume;
pub use subdivide::{barycentric_subdivide, perturbed_subdivide, regular_subdivide};

/// Link from a subdivision back to the complex it refines.
#[derive(Debug, Clone)]
pub struct ParentLink {
    pub parent: Arc<SimplicialComplex>,
    /// For each child vertex, its barycentric weights over parent vertices
    /// (sorted by parent vertex, all weights positive).
    pub support: Vec<Vec<(usize, f64)>>,
    /// The same weights as exact rationals, when the construction is exact.
    pub exact_support: Option<Vec<Vec<(usize, BigRational)>>>,
    /// `carrier[k][i]` is the smallest parent simplex `(dim, index)` that
    /// contains child `k`-simplex `i`.
    pub carrier: Vec<Vec<(usize, usize)>>,
}

#[derive(Debug, Clone)]
pub struct SimplicialComplex {
    dim: usize,
    embed: usize,
    coords: Vec<f64>,
    simplices: Vec<Vec<usize>>,
    index: Vec<BTreeMap<Vec<usize>, usize>>,
    top_sign: Vec<i8>,
    oriented: bool,
    closed: bool,
    boundaries: Vec<SparseInt>,
    parent: Option<ParentLink>,
}

impl SimplicialComplex {
    /// Manifold dimension `n`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Embedding dimension `N`.
    pub fn embed_dim(&self) -> usize {
        self.embed
    }

    pub fn n_vertices(&self) -> usize {
        self.count(0)
    }

    /// Number of `k`-simplices (0 outside `0..=n`).
    pub fn count(&self, k: usize) -> usize {
        if k > self.dim {
            0
        } else {
            self.simplices[k].len() / (k + 1)
        }
    }

    pub fn f_vector(&self) -> Vec<usize> {
        (0..=self.dim).map(|k| self.count(k)).collect()
    }

    pub fn euler_characteristic(&self) -> i64 {
        (0..=self.dim).map(|k| if k % 2 == 0 { self.count(k) as i64 } else { -(self.count(k) as i64) }).sum()
    }

    /// Sorted vertex tuple of `k`-simplex `i`.
    pub fn simplex(&self, k: usize, i: usize) -> &[usize] {
        &self.simplices[k][i * (k + 1)..(i + 1) * (k + 1)]
    }

    pub fn simplices(&self, k: usize) -> impl Iterator<Item = &[usize]> + '_ {
        self.simplices[k].chunks(k + 1)
    }

    /// Index of a sorted vertex tuple.
    pub fn find(&self, tuple: &[usize]) -> Option<usize> {
        let k = tuple.len().checked_sub(1)?;
        if k > self.dim {
            return None;
        }
        self.index[k].get(tuple).copied()
    }

    /// Orientation of `k`-simplex `i` relative to its sorted tuple.
    pub fn orientation(&self, k: usize, i: usize) -> i8 {
        if k == self.dim {
            self.top_sign[i]
        } else {
            1
        }
    }

    pub fn top_signs(&self) -> &[i8] {
        &self.top_sign
    }

    /// Whether the top signs form a global orientation.
    pub fn is_oriented(&self) -> bool {
        self.oriented
    }

    /// Whether every codimension-one simplex has exactly two cofaces.
    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn vertex(&self, v: usize) -> &[f64] {
        &self.coords[v * self.embed..(v + 1) * self.embed]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn parent(&self) -> Option<&ParentLink> {
        self.parent.as_ref()
    }

    /// `∂_k` as an `n_{k-1} × n_k` integer matrix.
    pub fn boundary(&self, k: usize) -> Result<&SparseInt> {
        if k == 0 || k > self.dim {
            return Err(Error::DegreeOutOfRange { degree: k, max: self.dim });
        }
        Ok(&self.boundaries[k - 1])
    }

    /// Coboundary `d_k : C^k → C^{k+1}`, i.e. `∂_{k+1}ᵀ`. Zero map for `k = n`.
    pub fn coboundary(&self, k: usize) -> SparseInt {
        if k >= self.dim {
            SparseInt::zeros(0, self.count(k))
        } else {
            self.boundaries[k].transpose()
        }
    }

    /// Boundary of an integer `k`-chain.
    pub fn boundary_of(&self, k: usize, chain: &[i64]) -> Vec<i64> {
        if k == 0 {
            return Vec::new();
        }
        self.boundaries[k - 1].mul_vec(chain)
    }

    /// Whether `ancestor` is reached by following parent links (pointer identity).
    pub fn descends_from(&self, ancestor: &SimplicialComplex) -> bool {
        let mut cur = self.parent.as_ref();
        while let Some(link) = cur {
            if core::ptr::eq(Arc::as_ptr(&link.parent), ancestor) {
                return true;
            }
            cur = link.parent.parent.as_ref();
        }
        false
    }

    /// Same combinatorics and parent link with every vertex moved by `f`,
    /// for example onto a round sphere after a refinement. The new points
    /// may live in a different ambient dimension.
    pub fn with_vertices<F: Fn(&[f64]) -> Vec<f64>>(&self, f: F) -> Result<SimplicialComplex> {
        let moved: Vec<Vec<f64>> = (0..self.n_vertices()).map(|v| f(self.vertex(v))).collect();
        let embed = moved.first().map_or(self.embed, |p| p.len());
        if moved.iter().any(|p| p.len() != embed || p.iter().any(|x| !x.is_finite())) {
            return Err(Error::InvalidInput("moved vertices must be finite points of one dimension".into()));
        }
        let mut c = self.clone();
        c.embed = embed;
        c.coords = moved.concat();
        for i in 0..c.count(c.dim) {
            let pts: Vec<&[f64]> = c.simplex(c.dim, i).iter().map(|&v| c.vertex(v)).collect();
            let longest = pts
                .iter()
                .enumerate()
                .flat_map(|(a, p)| pts[a + 1..].iter().map(move |q| p.iter().zip(q.iter()).map(|(x, y)| (x - y) * (x - y)).sum::<f64>()))
                .fold(0.0f64, f64::max);
            if !(geometry::simplex_volume_of(&pts) > 1e-12 * longest.sqrt().powi(c.dim as i32)) {
                return Err(Error::DegenerateSimplex(c.simplex(c.dim, i).to_vec()));
            }
        }
        Ok(c)
    }

    /// Same complex with the parent link dropped.
    pub fn detached(&self) -> SimplicialComplex {
        let mut c = self.clone();
        c.parent = None;
        c
    }
}
