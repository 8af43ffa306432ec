use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::geometry::simplex_volume_of;
use super::{ParentLink, SimplicialComplex};
use crate::linalg::SparseInt;
use crate::{Error, Result};

/// Knobs for [`build_complex_with`]. The defaults describe a closed oriented
/// pseudo-manifold.
#[derive(Debug, Clone, Default)]
pub struct BuildOptions {
    /// Orientation sign per top simplex, relative to the tuple order given.
    pub signs: Option<Vec<i8>>,
    /// Accept complexes without a global orientation (all top signs +1).
    pub allow_non_orientable: bool,
    /// Accept codimension-one simplices with a single coface.
    pub allow_boundary: bool,
}

/// Builds a closed oriented complex from vertex coordinates and top simplices.
pub fn build_complex(vertices: &[Vec<f64>], tops: &[Vec<usize>]) -> Result<SimplicialComplex> {
    build_complex_with(vertices, tops, &BuildOptions::default())
}

pub fn build_complex_with(vertices: &[Vec<f64>], tops: &[Vec<usize>], opts: &BuildOptions) -> Result<SimplicialComplex> {
    let embed = vertices.first().map_or(0, Vec::len);
    if vertices.iter().any(|v| v.len() != embed) {
        return Err(Error::InvalidInput("vertices have different embedding dimensions".into()));
    }
    let coords: Vec<f64> = vertices.iter().flatten().copied().collect();
    assemble(coords, embed, tops, opts, None)
}

/// Sign of the permutation sorting `t`, and the sorted tuple.
pub(crate) fn sort_with_parity(t: &[usize]) -> (Vec<usize>, i8) {
    let mut v = t.to_vec();
    let mut sign = 1i8;
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    (v, sign)
}

fn subsets(t: &[usize], size: usize, out: &mut BTreeSet<Vec<usize>>) {
    let m = t.len();
    for mask in 0u32..(1u32 << m) {
        if mask.count_ones() as usize == size {
            out.insert((0..m).filter(|i| mask & (1 << i) != 0).map(|i| t[i]).collect());
        }
    }
}

pub(crate) fn assemble(
    coords: Vec<f64>,
    embed: usize,
    tops: &[Vec<usize>],
    opts: &BuildOptions,
    parent: Option<ParentLink>,
) -> Result<SimplicialComplex> {
    let n_vertices = if embed == 0 { 0 } else { coords.len() / embed };
    let first = tops.first().ok_or_else(|| Error::InvalidInput("no top simplices".into()))?;
    if first.len() < 2 {
        return Err(Error::InvalidInput("top simplices must have dimension at least 1".into()));
    }
    let dim = first.len() - 1;
    if embed < dim {
        return Err(Error::InvalidInput(format!("embedding dimension {embed} below manifold dimension {dim}")));
    }
    if let Some(s) = &opts.signs {
        if s.len() != tops.len() || s.iter().any(|&x| x != 1 && x != -1) {
            return Err(Error::InvalidInput("orientation signs must be ±1, one per top simplex".into()));
        }
    }

    let mut sorted_tops = Vec::with_capacity(tops.len());
    let mut parities = Vec::with_capacity(tops.len());
    for t in tops {
        if t.len() != dim + 1 {
            return Err(Error::InvalidInput("top simplices of mixed dimension".into()));
        }
        if t.iter().any(|&v| v >= n_vertices) {
            return Err(Error::InvalidInput(format!("vertex index out of range in {t:?}")));
        }
        let (s, p) = sort_with_parity(t);
        if s.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::DegenerateSimplex(s));
        }
        sorted_tops.push(s);
        parities.push(p);
    }
    {
        let mut seen = BTreeSet::new();
        for t in &sorted_tops {
            if !seen.insert(t.clone()) {
                return Err(Error::InvalidInput(format!("duplicate top simplex {t:?}")));
            }
        }
    }

    // Degeneracy, relative to the simplex's own size.
    for t in &sorted_tops {
        let pts: Vec<&[f64]> = t.iter().map(|&v| &coords[v * embed..(v + 1) * embed]).collect();
        let vol = simplex_volume_of(&pts);
        let mut longest = 0.0f64;
        for i in 0..pts.len() {
            for j in (i + 1)..pts.len() {
                let d2: f64 = pts[i].iter().zip(pts[j]).map(|(a, b)| (a - b) * (a - b)).sum();
                longest = longest.max(d2);
            }
        }
        let scale = longest.sqrt().powi(dim as i32);
        if !(vol > 1e-12 * scale) {
            return Err(Error::DegenerateSimplex(t.clone()));
        }
    }

    // Closure under faces, lexicographic per degree.
    let mut levels: Vec<BTreeSet<Vec<usize>>> = vec![BTreeSet::new(); dim + 1];
    for t in &sorted_tops {
        for k in 0..dim {
            subsets(t, k + 1, &mut levels[k]);
        }
    }
    levels[dim] = sorted_tops.iter().cloned().collect();
    if levels[0].len() != n_vertices {
        return Err(Error::InvalidInput("some vertices belong to no top simplex".into()));
    }

    let mut simplices = Vec::with_capacity(dim + 1);
    let mut index = Vec::with_capacity(dim + 1);
    for lvl in &levels {
        let mut flat = Vec::with_capacity(lvl.len() * lvl.first().map_or(0, Vec::len));
        let mut map = BTreeMap::new();
        for (i, s) in lvl.iter().enumerate() {
            flat.extend_from_slice(s);
            map.insert(s.clone(), i);
        }
        simplices.push(flat);
        index.push(map);
    }
    // Top simplices in storage order, with their input position.
    let top_pos: BTreeMap<&Vec<usize>, usize> = sorted_tops.iter().enumerate().map(|(i, t)| (t, i)).collect();
    let storage_to_input: Vec<usize> = levels[dim].iter().map(|t| top_pos[t]).collect();
    let n_top = storage_to_input.len();

    // Cofaces of codimension-one simplices: (top, omitted position).
    let n_facets = index[dim - 1].len();
    let mut cofaces: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n_facets];
    for (ti, t) in levels[dim].iter().enumerate() {
        for omit in 0..=dim {
            let face: Vec<usize> = t.iter().enumerate().filter(|&(i, _)| i != omit).map(|(_, &v)| v).collect();
            cofaces[index[dim - 1][&face]].push((ti, omit));
        }
    }
    for (f, c) in cofaces.iter().enumerate() {
        if c.len() > 2 {
            return Err(Error::NonManifold(simplices[dim - 1][f * dim..(f + 1) * dim].to_vec()));
        }
    }

    // Orientation by breadth-first propagation across shared facets.
    let mut adj: Vec<Vec<(usize, usize, usize)>> = vec![Vec::new(); n_top];
    for c in &cofaces {
        if let [(a, i), (b, j)] = c[..] {
            adj[a].push((b, i, j));
            adj[b].push((a, j, i));
        }
    }
    let mut sign: Vec<i8> = vec![0; n_top];
    let mut component: Vec<usize> = vec![usize::MAX; n_top];
    let mut orientable = true;
    let mut n_components = 0;
    for start in 0..n_top {
        if sign[start] != 0 {
            continue;
        }
        sign[start] = 1;
        component[start] = n_components;
        let mut queue = VecDeque::from([start]);
        while let Some(a) = queue.pop_front() {
            for &(b, i, j) in &adj[a] {
                let parity = if (i + j) % 2 == 0 { 1 } else { -1 };
                let want = -parity * sign[a];
                if sign[b] == 0 {
                    sign[b] = want;
                    component[b] = n_components;
                    queue.push_back(b);
                } else if sign[b] != want {
                    orientable = false;
                }
            }
        }
        n_components += 1;
    }
    if !orientable {
        if !opts.allow_non_orientable {
            return Err(Error::NonOrientable);
        }
        sign.iter_mut().for_each(|s| *s = 1);
    } else if let Some(given) = &opts.signs {
        let mut flip: Vec<Option<bool>> = vec![None; n_components];
        for ti in 0..n_top {
            let inp = storage_to_input[ti];
            let g = given[inp] * parities[inp];
            let f = g != sign[ti];
            match flip[component[ti]] {
                None => flip[component[ti]] = Some(f),
                Some(prev) if prev != f => return Err(Error::NonOrientable),
                _ => {}
            }
        }
        for ti in 0..n_top {
            if flip[component[ti]] == Some(true) {
                sign[ti] = -sign[ti];
            }
        }
    }

    let mut closed = true;
    for (f, c) in cofaces.iter().enumerate() {
        if c.len() != 2 {
            closed = false;
            if !opts.allow_boundary {
                return Err(Error::BoundaryDetected { face: simplices[dim - 1][f * dim..(f + 1) * dim].to_vec(), cofaces: c.len() });
            }
        }
    }

    let mut boundaries = Vec::with_capacity(dim);
    for k in 1..=dim {
        let mut t = Vec::with_capacity(simplices[k].len());
        for (j, s) in simplices[k].chunks(k + 1).enumerate() {
            let o = if k == dim { sign[j] as i64 } else { 1 };
            for omit in 0..=k {
                let face: Vec<usize> = s.iter().enumerate().filter(|&(i, _)| i != omit).map(|(_, &v)| v).collect();
                let row = index[k - 1][&face];
                let v = if omit % 2 == 0 { o } else { -o };
                t.push((row, j, v));
            }
        }
        boundaries.push(SparseInt::from_triplets(index[k - 1].len(), index[k].len(), t));
    }

    Ok(SimplicialComplex { dim, embed, coords, simplices, index, top_sign: sign, oriented: orientable, closed, boundaries, parent })
}
