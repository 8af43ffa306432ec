//! Named manifolds with known reference data.
//!
//! Every id names a level-0 complex. Level `ℓ` is obtained by `ℓ` regular
//! refinements, each followed by moving the new vertices back onto the
//! smooth model (circle, round sphere, Clifford torus), so successive levels
//! descend from one another through parent links.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use simchar_core::complex::{build_complex, fixtures, regular_subdivide, SimplicialComplex};

use crate::{HarnessError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ManifoldId {
    /// Regular `N`-gon on the circle of circumference 1.
    Circle(usize),
    /// Möbius' 7-vertex torus on the Clifford torus, `t2_flat(7)`.
    FlatTorus7,
    /// `m × n` grid on the Clifford torus.
    FlatTorus(usize, usize),
    /// Tetrahedron boundary refined `levels` times and pushed to the unit sphere.
    Sphere(usize),
}

impl fmt::Display for ManifoldId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::Circle(n) => write!(f, "s1({n})"),
            Self::FlatTorus7 => write!(f, "t2_flat(7)"),
            Self::FlatTorus(m, n) => write!(f, "t2_flat({m},{n})"),
            Self::Sphere(l) => write!(f, "s2_tetra({l})"),
        }
    }
}

impl FromStr for ManifoldId {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        let unknown = || HarnessError::UnknownManifold(s.to_string());
        let s = s.trim();
        let open = s.find('(').ok_or_else(unknown)?;
        let inner = s[open + 1..].strip_suffix(')').ok_or_else(unknown)?;
        let args: Vec<usize> =
            inner.split(',').map(|a| a.trim().parse::<usize>()).collect::<std::result::Result<_, _>>().map_err(|_| unknown())?;
        match (&s[..open], args.as_slice()) {
            ("s1", &[n]) if n >= 3 => Ok(Self::Circle(n)),
            ("t2_flat", &[7]) => Ok(Self::FlatTorus7),
            ("t2_flat", &[m, n]) if m >= 3 && n >= 3 => Ok(Self::FlatTorus(m, n)),
            ("s2_tetra", &[l]) => Ok(Self::Sphere(l)),
            _ => Err(unknown()),
        }
    }
}

/// What is known about the smooth manifold behind a catalog entry.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceData {
    pub betti: Vec<usize>,
    /// The positively oriented top simplices add up to a cycle.
    pub orientation_certificate: bool,
    /// Smallest positive eigenvalue of the smooth scalar Laplacian, when known
    /// in closed form.
    pub smooth_gap: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub id: ManifoldId,
    pub complex: Arc<SimplicialComplex>,
    pub reference: ReferenceData,
}

impl ManifoldId {
    pub fn dim(&self) -> usize {
        match self {
            Self::Circle(_) => 1,
            _ => 2,
        }
    }

    pub fn betti(&self) -> Vec<usize> {
        match self {
            Self::Circle(_) => vec![1, 1],
            Self::FlatTorus7 | Self::FlatTorus(..) => vec![1, 2, 1],
            Self::Sphere(_) => vec![1, 0, 1],
        }
    }

    /// The first `count` positive eigenvalues (with multiplicity) of the
    /// smooth Laplacian on functions.
    pub fn smooth_spectrum(&self, count: usize) -> Vec<f64> {
        let mut out = Vec::new();
        match self {
            // Unit circumference: (2πk)², twice each.
            Self::Circle(_) => {
                for k in 1.. {
                    let l = (2.0 * PI * k as f64).powi(2);
                    out.extend([l, l]);
                    if out.len() >= count {
                        break;
                    }
                }
            }
            // Product of two unit circles: k² + l².
            Self::FlatTorus7 | Self::FlatTorus(..) => {
                let r = (count as f64).sqrt() as i64 + 2;
                for k in -r..=r {
                    for l in -r..=r {
                        if (k, l) != (0, 0) {
                            out.push((k * k + l * l) as f64);
                        }
                    }
                }
                out.sort_by(f64::total_cmp);
            }
            // Unit sphere: l(l+1), 2l+1 times.
            Self::Sphere(_) => {
                for l in 1.. {
                    out.extend(std::iter::repeat((l * (l + 1)) as f64).take(2 * l + 1));
                    if out.len() >= count {
                        break;
                    }
                }
            }
        }
        out.truncate(count);
        out
    }

    /// Level-0 complex.
    pub fn base_complex(&self) -> Result<SimplicialComplex> {
        Ok(match *self {
            Self::Circle(n) => fixtures::cycle(n),
            Self::FlatTorus7 => fixtures::torus7(),
            Self::FlatTorus(m, n) => clifford_grid(m, n)?,
            Self::Sphere(levels) => {
                let mut x = Arc::new(fixtures::tetrahedron_boundary());
                for _ in 0..levels {
                    x = Arc::new(self.refine(&x)?);
                }
                x.detached()
            }
        })
    }

    /// One regular refinement of `x`, projected back onto the smooth model.
    pub fn refine(&self, x: &Arc<SimplicialComplex>) -> Result<SimplicialComplex> {
        Ok(regular_subdivide(x)?.with_vertices(|p| self.project(p))?)
    }

    fn project(&self, p: &[f64]) -> Vec<f64> {
        let scale = |q: &[f64], r: f64| {
            let norm = q.iter().map(|x| x * x).sum::<f64>().sqrt();
            q.iter().map(|x| x * r / norm).collect::<Vec<f64>>()
        };
        match self {
            Self::Circle(_) => scale(p, 1.0 / (2.0 * PI)),
            Self::Sphere(_) => scale(p, 1.0),
            Self::FlatTorus7 | Self::FlatTorus(..) => [scale(&p[..2], 1.0), scale(&p[2..], 1.0)].concat(),
        }
    }

    /// The complexes of `levels` (strictly increasing), each refined from
    /// the previous one.
    pub fn levels(&self, levels: &[u32]) -> Result<Vec<Arc<SimplicialComplex>>> {
        if levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(HarnessError::Plan("levels must be strictly increasing".into()));
        }
        let mut out = Vec::with_capacity(levels.len());
        let mut x = Arc::new(self.base_complex()?);
        let mut at = 0;
        for &l in levels {
            while at < l {
                x = Arc::new(self.refine(&x)?);
                at += 1;
            }
            out.push(x.clone());
        }
        Ok(out)
    }
}

fn clifford_grid(m: usize, n: usize) -> Result<SimplicialComplex> {
    let mut v = Vec::with_capacity(m * n);
    for i in 0..m {
        for j in 0..n {
            let (a, b) = (2.0 * PI * i as f64 / m as f64, 2.0 * PI * j as f64 / n as f64);
            v.push(vec![a.cos(), a.sin(), b.cos(), b.sin()]);
        }
    }
    let at = |i: usize, j: usize| (i % m) * n + j % n;
    let mut t = Vec::with_capacity(2 * m * n);
    for i in 0..m {
        for j in 0..n {
            t.push(vec![at(i, j), at(i + 1, j), at(i + 1, j + 1)]);
            t.push(vec![at(i, j), at(i + 1, j + 1), at(i, j + 1)]);
        }
    }
    Ok(build_complex(&v, &t)?)
}

pub fn orientation_certificate(x: &SimplicialComplex) -> bool {
    let n = x.dim();
    if !x.is_oriented() || n == 0 {
        return x.is_oriented();
    }
    x.boundary_of(n, &vec![1; x.count(n)]).iter().all(|&c| c == 0)
}

pub fn catalog(id: &str) -> Result<CatalogEntry> {
    let id: ManifoldId = id.parse()?;
    let complex = Arc::new(id.base_complex()?);
    let reference = ReferenceData {
        betti: id.betti(),
        orientation_certificate: orientation_certificate(&complex),
        smooth_gap: id.smooth_spectrum(1).first().copied(),
    };
    Ok(CatalogEntry { id, complex, reference })
}
