//! Plain-text complexes.
//!
//! ```text
//! dim 2 embed 3
//! v 0.57735026918962573 0.57735026918962573 0.57735026918962573
//! ...
//! s 0 1 2 1
//! s 0 1 3 -1
//! ```
//!
//! One `v` line per vertex (in index order), one `s` line per top simplex.
//! The optional trailing `±1` is the orientation of the listed vertex order;
//! without it the order itself is taken as positive. Blank lines and lines
//! starting with `#` are ignored. Coordinates are written in the shortest
//! form that parses back to the same `f64`.

use std::fmt::Write as _;

use simchar_core::complex::{build_complex_with, BuildOptions, SimplicialComplex};

use crate::{HarnessError, Result};

pub fn write_complex(x: &SimplicialComplex) -> String {
    let n = x.dim();
    let mut out = String::new();
    let _ = writeln!(out, "dim {n} embed {}", x.embed_dim());
    for v in 0..x.n_vertices() {
        out.push('v');
        for c in x.vertex(v) {
            let _ = write!(out, " {c:?}");
        }
        out.push('\n');
    }
    for (i, s) in x.simplices(n).enumerate() {
        out.push('s');
        for v in s {
            let _ = write!(out, " {v}");
        }
        let _ = writeln!(out, " {}", x.orientation(n, i));
    }
    out
}

fn bad(line: usize, what: impl Into<String>) -> HarnessError {
    HarnessError::Format(format!("line {line}: {}", what.into()))
}

pub fn read_complex(text: &str) -> Result<SimplicialComplex> {
    read_complex_with(text, &BuildOptions::default())
}

pub fn read_complex_with(text: &str, options: &BuildOptions) -> Result<SimplicialComplex> {
    let mut header: Option<(usize, usize)> = None;
    let mut vertices: Vec<Vec<f64>> = Vec::new();
    let mut tops: Vec<Vec<usize>> = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let ln = ln + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut words = line.split_whitespace();
        let tag = words.next().unwrap_or_default();
        let rest: Vec<&str> = words.collect();
        match (tag, header) {
            ("dim", None) => {
                let [n, "embed", e] = rest.as_slice() else { return Err(bad(ln, "expected `dim n embed N`")) };
                let n = n.parse().map_err(|_| bad(ln, "bad dimension"))?;
                let e = e.parse().map_err(|_| bad(ln, "bad embedding dimension"))?;
                header = Some((n, e));
            }
            (_, None) => return Err(bad(ln, "missing `dim n embed N` header")),
            ("v", Some((_, e))) => {
                if !tops.is_empty() {
                    return Err(bad(ln, "vertex after simplices"));
                }
                if rest.len() != e {
                    return Err(bad(ln, format!("expected {e} coordinates, found {}", rest.len())));
                }
                let p = rest.iter().map(|w| w.parse::<f64>()).collect::<std::result::Result<Vec<_>, _>>();
                vertices.push(p.map_err(|_| bad(ln, "bad coordinate"))?);
            }
            ("s", Some((n, _))) => {
                let (idx, sign) = match rest.len() {
                    l if l == n + 1 => (&rest[..], 1),
                    l if l == n + 2 => match rest[n + 1] {
                        "1" | "+1" => (&rest[..=n], 1),
                        "-1" => (&rest[..=n], -1),
                        _ => return Err(bad(ln, "orientation must be 1 or -1")),
                    },
                    _ => return Err(bad(ln, format!("expected {} vertex indices", n + 1))),
                };
                let mut s = idx
                    .iter()
                    .map(|w| w.parse::<usize>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| bad(ln, "bad vertex index"))?;
                if sign < 0 && s.len() >= 2 {
                    s.swap(0, 1);
                }
                tops.push(s);
            }
            ("dim", Some(_)) => return Err(bad(ln, "repeated header")),
            (other, _) => return Err(bad(ln, format!("unknown record `{other}`"))),
        }
    }
    let Some((n, _)) = header else { return Err(HarnessError::Format("empty file".into())) };
    if tops.first().is_some_and(|t| t.len() != n + 1) {
        return Err(HarnessError::Format("simplex size does not match the dimension".into()));
    }
    let x = build_complex_with(&vertices, &tops, options)?;
    if x.dim() != n {
        return Err(HarnessError::Format(format!("header says dimension {n}, simplices give {}", x.dim())));
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use simchar_core::complex::fixtures;

    #[test]
    fn fixtures_round_trip() {
        for x in [fixtures::cycle(5), fixtures::torus7(), fixtures::tetrahedron_boundary()] {
            let text = write_complex(&x);
            let y = read_complex(&text).unwrap();
            assert_eq!(write_complex(&y), text);
            assert_eq!(x.coords(), y.coords());
            assert_eq!(x.top_signs(), y.top_signs());
        }
    }

    #[test]
    fn orientation_flag_swaps_the_order() {
        let plain = "dim 1 embed 1\nv 0\nv 1\nv 2.5\ns 0 1\ns 1 2\ns 2 0\n";
        let flagged = "dim 1 embed 1\n# same circle\nv 0\nv 1\nv 2.5\n\ns 0 1 1\ns 1 2 +1\ns 0 2 -1\n";
        assert_eq!(write_complex(&read_complex(plain).unwrap()), write_complex(&read_complex(flagged).unwrap()));
    }

    #[test]
    fn malformed_input_is_reported() {
        for text in [
            "",
            "v 0 0\n",
            "dim 1 embed 2\nv 0\n",
            "dim 1 embed 1\nv 0\nv 1\ns 0\n",
            "dim 1 embed 1\nv 0\nv 1\ns 0 1 7\n",
            "dim 1 embed 1\nv 0\nv x\n",
            "dim 1 embed 1\nv 0\nv 1\nq 1\n",
        ] {
            assert!(matches!(read_complex(text), Err(HarnessError::Format(_))), "{text:?}");
        }
        assert!(matches!(read_complex("dim 1 embed 1\nv 0\nv 1\ns 0 1\n"), Err(HarnessError::Core(_))));
    }
}
