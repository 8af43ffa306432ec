use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::complex::{ParentLink, SimplicialComplex};
use crate::linalg::SparseInt;
use crate::{Error, Result};

fn link(child: &SimplicialComplex) -> Result<&ParentLink> {
    child.parent().ok_or(Error::NoParentLink)
}

fn check_degree(x: &SimplicialComplex, k: usize) -> Result<()> {
    if k > x.dim() {
        return Err(Error::DegreeOutOfRange { degree: k, max: x.dim() });
    }
    Ok(())
}

/// Subdivision chain map `C_k(parent) → C_k(child)` as an `n′_k × n_k`
/// matrix: a parent simplex goes to the signed sum of the children that
/// fill it.
pub fn subdivision_chain_map(child: &SimplicialComplex, k: usize) -> Result<SparseInt> {
    check_degree(child, k)?;
    let link = link(child)?;
    let parent = &link.parent;
    let mut t = Vec::new();
    for (s, tuple) in child.simplices(k).enumerate() {
        let (cd, c) = link.carrier[k][s];
        if cd != k {
            continue;
        }
        let pv = parent.simplex(k, c);
        let mut lam = DMatrix::<f64>::zeros(k + 1, k + 1);
        for (j, &v) in tuple.iter().enumerate() {
            for &(p, w) in &link.support[v] {
                let r = pv.iter().position(|&q| q == p).expect("support lies in the carrier");
                lam[(r, j)] = w;
            }
        }
        let det = lam.determinant();
        let sign: i64 = if det > 0.0 { 1 } else { -1 };
        let o = i64::from(child.orientation(k, s)) * i64::from(parent.orientation(k, c));
        t.push((s, c, sign * o));
    }
    Ok(SparseInt::from_triplets(child.count(k), parent.count(k), t))
}

/// Chain map `C_k(child) → C_k(parent)` induced by the vertex map sending a
/// child vertex to the smallest parent vertex of its support. This is a
/// simplicial approximation of the identity, so it inverts the subdivision
/// map on the chain level.
pub fn vertex_chain_map(child: &SimplicialComplex, k: usize) -> Result<SparseInt> {
    check_degree(child, k)?;
    let link = link(child)?;
    let parent = &link.parent;
    let image: Vec<usize> = link.support.iter().map(|s| s.iter().map(|&(p, _)| p).min().expect("nonempty support")).collect();
    let mut t = Vec::new();
    for (s, tuple) in child.simplices(k).enumerate() {
        let raw: Vec<usize> = tuple.iter().map(|&v| image[v]).collect();
        let (img, parity) = crate::complex::sort_with_parity(&raw);
        if img.windows(2).any(|w| w[0] == w[1]) {
            continue;
        }
        let p = parent.find(&img).ok_or_else(|| Error::InvalidInput("vertex map is not simplicial".into()))?;
        let o = i64::from(child.orientation(k, s)) * i64::from(parent.orientation(k, p));
        t.push((p, s, i64::from(parity) * o));
    }
    Ok(SparseInt::from_triplets(parent.count(k), child.count(k), t))
}
