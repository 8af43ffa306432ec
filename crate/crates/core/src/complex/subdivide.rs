use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{Cholesky, DMatrix, DVector};
use num_bigint::BigInt;
use num_rational::BigRational;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::build::assemble;
use super::geometry::edge_gram;
use super::{BuildOptions, ParentLink, SimplicialComplex};
use crate::{Error, Result};

const MAX_PERTURBATION_TRIES: usize = 64;

/// All permutations of `0..m` in lexicographic order.
fn permutations(m: usize) -> Vec<Vec<usize>> {
    let mut p: Vec<usize> = (0..m).collect();
    let mut out = vec![p.clone()];
    loop {
        let Some(i) = (1..m).rev().find(|&i| p[i - 1] < p[i]) else { break };
        let j = (i..m).rev().find(|&j| p[j] > p[i - 1]).unwrap();
        p.swap(i - 1, j);
        p[i..].reverse();
        out.push(p.clone());
    }
    out
}

fn vertex_offsets(x: &SimplicialComplex) -> Vec<usize> {
    let mut off = vec![0; x.dim() + 2];
    for k in 0..=x.dim() {
        off[k + 1] = off[k] + x.count(k);
    }
    off
}

/// Child top simplices of the barycentric subdivision: one flag per
/// permutation of each parent top simplex.
fn flag_tops(x: &SimplicialComplex) -> Vec<Vec<usize>> {
    let n = x.dim();
    let off = vertex_offsets(x);
    let perms = permutations(n + 1);
    let mut tops = Vec::with_capacity(x.count(n) * perms.len());
    for t in x.simplices(n) {
        for p in &perms {
            let mut tuple = Vec::with_capacity(n + 1);
            let mut face = Vec::with_capacity(n + 1);
            for m in 0..=n {
                face.push(t[p[m]]);
                let mut s = face.clone();
                s.sort_unstable();
                tuple.push(off[m] + x.find(&s).expect("face of a top simplex"));
            }
            tops.push(tuple);
        }
    }
    tops
}

fn barycentric_supports(x: &SimplicialComplex) -> (Vec<Vec<(usize, f64)>>, Vec<Vec<(usize, BigRational)>>) {
    let mut sup = Vec::new();
    let mut exact = Vec::new();
    for k in 0..=x.dim() {
        let w = 1.0 / (k + 1) as f64;
        let q = BigRational::new(BigInt::from(1), BigInt::from(k + 1));
        for s in x.simplices(k) {
            sup.push(s.iter().map(|&v| (v, w)).collect());
            exact.push(s.iter().map(|&v| (v, q.clone())).collect());
        }
    }
    (sup, exact)
}

/// Standard barycentric subdivision; every top simplex splits into `(n+1)!`.
pub fn barycentric_subdivide(x: &Arc<SimplicialComplex>) -> Result<SimplicialComplex> {
    let (sup, exact) = barycentric_supports(x);
    finish(x, sup, Some(exact), flag_tops(x))
}

/// Barycentric subdivision with every inserted barycenter moved by a seeded
/// random offset of length at most `scale · inradius(σ)`, dimension by
/// dimension and lexicographically within a dimension.
pub fn perturbed_subdivide(x: &Arc<SimplicialComplex>, seed: u64, scale: f64) -> Result<SimplicialComplex> {
    if !(scale > 0.0 && scale < 0.5) {
        return Err(Error::InvalidInput(alloc::format!("perturbation scale {scale} outside (0, 1/2)")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sup: Vec<Vec<(usize, f64)>> = x.simplices(0).map(|s| vec![(s[0], 1.0)]).collect();
    for k in 1..=x.dim() {
        for i in 0..x.count(k) {
            sup.push(perturbed_weights(x, k, i, scale, &mut rng)?);
        }
    }
    finish(x, sup, None, flag_tops(x))
}

fn perturbed_weights(x: &SimplicialComplex, k: usize, i: usize, scale: f64, rng: &mut ChaCha8Rng) -> Result<Vec<(usize, f64)>> {
    let pts = x.points(k, i);
    let chol = Cholesky::new(edge_gram(&pts)).ok_or(Error::DegenerateSimplex(x.simplex(k, i).to_vec()))?;
    let radius = scale * x.inradius(k, i);
    let base = 1.0 / (k + 1) as f64;
    for _ in 0..MAX_PERTURBATION_TRIES {
        let g: Vec<f64> = (0..k).map(|_| rng.sample(StandardNormal)).collect();
        let gn = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        let u: f64 = rng.random();
        if gn == 0.0 {
            continue;
        }
        let rho = radius * u.powf(1.0 / k as f64);
        // With EᵀE = L Lᵀ, c = L⁻ᵀ g gives |E c| = |g|.
        let c = chol.l().transpose().solve_upper_triangular(&DVector::from_vec(g)).expect("triangular factor is invertible");
        let c = c * (rho / gn);
        let mut w = vec![base - c.sum()];
        w.extend(c.iter().map(|cj| base + cj));
        if w.iter().all(|&wj| wj > 1e-12) {
            return Ok(x.simplex(k, i).iter().copied().zip(w).collect());
        }
    }
    Err(Error::PerturbationEscapedSimplex { dim: k, index: i })
}

/// Edge-midpoint refinement for curves and surfaces: every edge halves and
/// every triangle splits into four similar triangles.
pub fn regular_subdivide(x: &Arc<SimplicialComplex>) -> Result<SimplicialComplex> {
    let n = x.dim();
    if n > 2 {
        return Err(Error::InvalidInput("regular refinement supports dimension 1 and 2 only".into()));
    }
    let nv = x.n_vertices();
    let mut sup: Vec<Vec<(usize, f64)>> = (0..nv).map(|v| vec![(v, 1.0)]).collect();
    let mut exact: Vec<Vec<(usize, BigRational)>> = (0..nv).map(|v| vec![(v, BigRational::from_integer(1.into()))]).collect();
    let half = BigRational::new(1.into(), 2.into());
    for e in x.simplices(1) {
        sup.push(vec![(e[0], 0.5), (e[1], 0.5)]);
        exact.push(vec![(e[0], half.clone()), (e[1], half.clone())]);
    }
    let mid = |a: usize, b: usize| nv + x.find(&[a.min(b), a.max(b)]).expect("edge of the complex");
    let mut tops = Vec::new();
    if n == 1 {
        for e in x.simplices(1) {
            let m = mid(e[0], e[1]);
            tops.push(vec![e[0], m]);
            tops.push(vec![m, e[1]]);
        }
    } else {
        for t in x.simplices(2) {
            let (a, b, c) = (t[0], t[1], t[2]);
            let (ab, ac, bc) = (mid(a, b), mid(a, c), mid(b, c));
            tops.push(vec![a, ab, ac]);
            tops.push(vec![b, ab, bc]);
            tops.push(vec![c, ac, bc]);
            tops.push(vec![ab, bc, ac]);
        }
    }
    finish(x, sup, Some(exact), tops)
}

fn finish(
    parent: &Arc<SimplicialComplex>,
    support: Vec<Vec<(usize, f64)>>,
    exact_support: Option<Vec<Vec<(usize, BigRational)>>>,
    tops: Vec<Vec<usize>>,
) -> Result<SimplicialComplex> {
    let n = parent.dim();
    let embed = parent.embed_dim();
    let mut coords = vec![0.0; support.len() * embed];
    for (v, s) in support.iter().enumerate() {
        for &(p, w) in s {
            for (c, x) in coords[v * embed..(v + 1) * embed].iter_mut().zip(parent.vertex(p)) {
                *c += w * x;
            }
        }
    }

    let union_of = |tuple: &[usize]| -> Vec<usize> {
        let mut u: Vec<usize> = tuple.iter().flat_map(|&v| support[v].iter().map(|&(p, _)| p)).collect();
        u.sort_unstable();
        u.dedup();
        u
    };

    let signs = if parent.is_oriented() {
        let mut signs = Vec::with_capacity(tops.len());
        for t in &tops {
            let carrier = union_of(t);
            let ci = parent
                .find(&carrier)
                .filter(|_| carrier.len() == n + 1)
                .ok_or_else(|| Error::InvalidInput(alloc::format!("child simplex {t:?} is not inside a parent top simplex")))?;
            let mut lam = DMatrix::<f64>::zeros(n + 1, n + 1);
            for (j, &v) in t.iter().enumerate() {
                for &(p, w) in &support[v] {
                    let r = carrier.iter().position(|&q| q == p).unwrap();
                    lam[(r, j)] = w;
                }
            }
            let det = lam.determinant();
            let s: i8 = if det > 0.0 { 1 } else { -1 };
            signs.push(s * parent.orientation(n, ci));
        }
        Some(signs)
    } else {
        None
    };

    let opts = BuildOptions { signs, allow_non_orientable: !parent.is_oriented(), allow_boundary: !parent.is_closed() };
    let mut child = assemble(coords, embed, &tops, &opts, None)?;

    let mut carrier = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let mut ck = Vec::with_capacity(child.count(k));
        for s in child.simplices(k) {
            let u = union_of(s);
            let idx = parent.find(&u).ok_or_else(|| Error::InvalidInput(alloc::format!("no parent simplex carries {s:?}")))?;
            ck.push((u.len() - 1, idx));
        }
        carrier.push(ck);
    }
    child.parent = Some(ParentLink { parent: parent.clone(), support, exact_support, carrier });
    Ok(child)
}
