//! Convergence experiments: one row per refinement level, then a list of
//! trend checks over the rows.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;
use std::time::Instant;

use simchar_core::characters::{circle_distance, verify_model, wrap, CharacterModel, CsTriangulation};
use simchar_core::complex::{perturbed_subdivide, SimplicialComplex};
use simchar_core::gauge::{partition_function, partition_function_base, PartitionResult, Truncation};
use simchar_core::hodge::{log_det_from_spectrum, HodgeComplex, HodgeOptions};
use simchar_core::linalg::{max_abs, Mat};

use crate::catalog::ManifoldId;
use crate::plan::ExperimentPlan;
use crate::report::{ConvergenceRow, Format, Row};
use crate::{HarnessError, Result};

/// One checked invariant of a run.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Self { name: name.into(), passed, detail }
    }
}

#[derive(Clone, Debug)]
pub struct ConvergenceOutcome {
    pub rows: Vec<ConvergenceRow>,
    pub checks: Vec<Check>,
}

impl ConvergenceOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Streams rows to a report as they are produced, flushing after each one
/// so that a failing run leaves everything computed so far on disk.
pub struct ReportWriter<W: Write> {
    inner: Sink<W>,
}

enum Sink<W: Write> {
    Csv(csv::Writer<W>),
    Jsonl(W),
}

impl<W: Write> ReportWriter<W> {
    /// A CSV header is written immediately.
    pub fn new(out: W, format: Format, timings: bool) -> Result<Self> {
        let inner = match format {
            Format::Csv => {
                let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
                w.write_record(ConvergenceRow::header(timings))?;
                w.flush()?;
                Sink::Csv(w)
            }
            Format::Jsonl => Sink::Jsonl(out),
        };
        Ok(Self { inner })
    }

    pub fn write(&mut self, row: &ConvergenceRow) -> Result<()> {
        match &mut self.inner {
            Sink::Csv(w) => {
                w.write_record(row.to_record().iter().map(|(_, v)| v.csv_cell()))?;
                w.flush()?;
            }
            Sink::Jsonl(w) => {
                writeln!(w, "{}", crate::report::json_line(&row.to_record()))?;
                w.flush()?;
            }
        }
        Ok(())
    }
}

struct DegreeStats {
    gap: f64,
    log_det_coexact: f64,
    det_h: f64,
    hodge_residual: f64,
}

fn degree_stats(hc: &HodgeComplex, r: usize) -> Result<DegreeStats> {
    let frame = hc.frame(r)?;
    let betti = frame.harmonic_basis.ncols();
    let gap = frame.eigen.values.get(betti).copied().unwrap_or(f64::NAN);
    let det_h = if frame.h_matrix.nrows() == 0 { 1.0 } else { frame.h_matrix.determinant() };
    let up = hc.up_spectrum(r)?;
    // With Q = [H E C], the projectors sum to Q Qᵀ M and are pairwise
    // orthogonal exactly when the blocks of Qᵀ M Q off the diagonal vanish.
    let (h, e, c) = (&frame.harmonic_basis, &frame.exact_basis, &frame.coexact_basis);
    let q = Mat::from_fn(h.nrows(), h.ncols() + e.ncols() + c.ncols(), |i, j| match j {
        j if j < h.ncols() => h[(i, j)],
        j if j < h.ncols() + e.ncols() => e[(i, j - h.ncols())],
        j => c[(i, j - h.ncols() - e.ncols())],
    });
    let n = q.nrows();
    let qm = q.transpose() * &frame.gram;
    let sum = max_abs(&(&q * &qm - Mat::identity(n, n)));
    let cross = [(h, e), (h, c), (e, c)].iter().map(|(a, b)| max_abs(&(a.transpose() * &frame.gram * *b))).fold(0.0, f64::max);
    Ok(DegreeStats { gap, log_det_coexact: log_det_from_spectrum(up.nonzero()), det_h, hodge_residual: sum.max(cross) })
}

/// Statistics of every degree, one thread per degree.
fn all_degree_stats(hc: &HodgeComplex) -> Result<Vec<DegreeStats>> {
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..=hc.dim()).map(|r| s.spawn(move || degree_stats(hc, r))).collect();
        handles.into_iter().map(|h| h.join().expect("degree worker panicked")).collect()
    })
}

/// Nodes and weights of `n`-point Gauss–Legendre quadrature on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let k = k as f64;
                    (p0, p1) = (p1, ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k);
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let step = p1 / dp;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rule: &[(f64, f64)]) -> f64 {
    let (mid, half) = ((a + b) / 2.0, (b - a) / 2.0);
    half * rule.iter().map(|&(x, w)| w * f(mid + half * x)).sum::<f64>()
}

/// The smooth character on the circle used for the approximation proxy:
/// `f(θ) = (θ + sin θ)/2π mod 1`, with form part `η = (1 + cos θ)/2π dθ`.
pub fn circle_character(theta: f64) -> f64 {
    wrap((theta + theta.sin()) / (2.0 * PI))
}

fn circle_form(theta: f64) -> f64 {
    (1.0 + theta.cos()) / (2.0 * PI)
}

fn angle(p: &[f64]) -> f64 {
    p[1].atan2(p[0])
}

/// Largest `ℝ/ℤ` distance, over all vertices of the subdivision, between
/// the smooth circle character and its discrete approximation built from
/// the integrals of its form part over the base edges.
///
/// Both complexes must lie in the plane around the origin; points are
/// identified with the circle by their polar angle.
pub fn circle_character_error(cs: &Arc<CsTriangulation>) -> Result<f64> {
    let model = CharacterModel::new(cs.clone(), 0)?;
    let (base, fine) = (cs.base(), cs.fine());
    if base.dim() != 1 || base.embed_dim() != 2 {
        return Err(HarnessError::Plan("the circle character needs a planar circle".into()));
    }
    let rule = gauss_legendre(12);
    let omega: Vec<f64> = base
        .simplices(1)
        .enumerate()
        .map(|(i, e)| {
            let a = angle(base.vertex(e[0]));
            let d = wrap(((angle(base.vertex(e[1])) - a) / (2.0 * PI)) + 0.5) - 0.5;
            base.orientation(1, i) as f64 * integrate(circle_form, a, a + 2.0 * PI * d, &rule)
        })
        .collect();
    let mut ch = model.delta1_preimage(&omega)?;
    let link = fine.parent().ok_or(simchar_core::Error::NoParentLink)?;
    let anchor = (0..fine.n_vertices()).find(|&v| link.support[v].len() == 1).ok_or(simchar_core::Error::NoParentLink)?;
    let point = |v: usize| {
        let mut a = vec![0i64; fine.n_vertices()];
        a[v] = 1;
        a
    };
    let g = model.evaluate(&ch, &point(anchor))?;
    ch.z[0] = wrap(ch.z[0] + circle_character(angle(fine.vertex(anchor))) - g);
    let mut worst: f64 = 0.0;
    for v in 0..fine.n_vertices() {
        let want = circle_character(angle(fine.vertex(v)));
        worst = worst.max(circle_distance(want - model.evaluate(&ch, &point(v))?));
    }
    Ok(worst)
}

fn fine_top_count(x: &SimplicialComplex) -> usize {
    let n = x.dim();
    x.count(n) * (1..=n + 1).product::<usize>()
}

fn relative_error(value: f64, reference: f64) -> f64 {
    (value - reference).abs() / reference.abs()
}

fn level_row(
    plan: &ExperimentPlan,
    id: ManifoldId,
    index: usize,
    level: u32,
    x: &Arc<SimplicialComplex>,
    fitted_c: &mut f64,
) -> Result<ConvergenceRow> {
    let start = Instant::now();
    let tol = &plan.tolerances;
    let seed = plan.seed(index);
    let (mesh, fullness) = (x.mesh(), x.fullness());
    if !(fullness >= tol.fullness_floor) {
        return Err(HarnessError::FullnessBelowFloor { level, fullness, floor: tol.fullness_floor });
    }
    let options = HodgeOptions { kernel_threshold: tol.kernel_threshold };
    let hc = HodgeComplex::with_computed_topology(x.clone(), options)?;
    let stats = all_degree_stats(&hc)?;

    let action = plan.action_spec()?;
    let truncation = Truncation { radius: plan.window, tolerance: tol.theta };
    let choice = plan.observable_choice()?;
    let needs_model = !choice.is_constant() || (matches!(id, ManifoldId::Circle(_)) && plan.p == 0);
    let cs = if needs_model { Some(Arc::new(CsTriangulation::perturbed(x.clone(), seed, plan.scale, options)?)) } else { None };
    let z: PartitionResult = match (&cs, choice.is_constant()) {
        (_, true) => partition_function_base(&hc, plan.p, &action, truncation)?,
        (Some(cs), false) => {
            let model = CharacterModel::new(cs.clone(), plan.p)?;
            partition_function(&model, &action, &choice.resolve(&model)?, truncation)?
        }
        (None, false) => unreachable!("a model is built for non-constant observables"),
    };

    let (model_check, stokes) = if fine_top_count(x) <= tol.max_fine_simplices {
        let fine = match &cs {
            Some(cs) => cs.fine().clone(),
            None => Arc::new(perturbed_subdivide(x, seed, plan.scale)?),
        };
        let report = verify_model(x, &fine, Some(seed))?;
        let ok = report.passed() && report.stokes <= tol.stokes;
        (if ok { "pass" } else { "fail" }.to_string(), report.stokes)
    } else {
        ("skipped".to_string(), f64::NAN)
    };

    let eigen_error = match id.smooth_spectrum(1).first() {
        Some(&gap) => relative_error(stats[0].gap, gap),
        None => f64::NAN,
    };
    let character_error = match (&cs, id, plan.p) {
        (Some(cs), ManifoldId::Circle(_), 0) => circle_character_error(cs)?,
        _ => f64::NAN,
    };
    if character_error.is_finite() {
        *fitted_c = fitted_c.max(character_error / mesh);
    }

    Ok(ConvergenceRow {
        manifold: id.to_string(),
        level: level as i64,
        seed: seed as i64,
        top_simplices: x.count(x.dim()) as i64,
        mesh,
        fullness,
        betti: hc.topology().bettis().into_iter().map(|b| b as i64).collect(),
        spectral_gaps: stats.iter().map(|s| s.gap).collect(),
        log_det_coexact: stats.iter().map(|s| s.log_det_coexact).collect(),
        det_h: stats.iter().map(|s| s.det_h).collect(),
        partition: z.value,
        log_partition: z.log_abs,
        class_sum: z.class_sum,
        eigen_error,
        character_error,
        fitted_c: if character_error.is_finite() { *fitted_c } else { f64::NAN },
        model_check,
        stokes,
        hodge_residual: stats.iter().map(|s| s.hodge_residual).fold(0.0, f64::max),
        config_hash: plan.config_hash(),
        wall_time: plan.record_timings.then(|| start.elapsed().as_secs_f64()),
    })
}

/// Runs every level of `plan`, handing each row to `sink` as soon as it is
/// computed, then checks the trends across levels.
///
/// Errors abort the run after the rows computed so far have been handed on.
pub fn run_convergence<F: FnMut(&ConvergenceRow) -> Result<()>>(plan: &ExperimentPlan, mut sink: F) -> Result<ConvergenceOutcome> {
    plan.validate()?;
    let id = plan.manifold_id()?;
    let complexes = id.levels(&plan.levels)?;
    let mut rows = Vec::with_capacity(complexes.len());
    let mut fitted_c = 0.0;
    for (i, (x, &level)) in complexes.iter().zip(&plan.levels).enumerate() {
        let row = level_row(plan, id, i, level, x, &mut fitted_c)?;
        sink(&row)?;
        rows.push(row);
    }
    let checks = trend_checks(plan, id, &rows);
    Ok(ConvergenceOutcome { rows, checks })
}

fn sci(v: &[f64], digits: usize) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.digits$e}")).collect();
    format!("[{}]", parts.join(", "))
}

/// Successive differences strictly decrease from the one between the second
/// and third rows onwards. Differences at rounding level count as zero, and
/// a zero difference may be followed by another.
fn cauchy_check(name: &str, values: &[f64]) -> Option<Check> {
    let diffs: Vec<f64> = values
        .windows(2)
        .map(|w| {
            let d = (w[1] - w[0]).abs();
            if d <= 64.0 * f64::EPSILON * w[0].abs().max(w[1].abs()) {
                0.0
            } else {
                d
            }
        })
        .collect();
    let tail = diffs.get(1..).filter(|t| t.len() >= 2)?;
    let ok = tail.windows(2).all(|w| w[1] < w[0] || w == [0.0, 0.0]);
    Some(Check::new(name, ok, format!("successive differences {}", sci(&diffs, 3))))
}

pub fn trend_checks(plan: &ExperimentPlan, id: ManifoldId, rows: &[ConvergenceRow]) -> Vec<Check> {
    let tol = &plan.tolerances;
    let mut out = Vec::new();
    let meshes: Vec<f64> = rows.iter().map(|r| r.mesh).collect();
    out.push(Check::new("mesh decreasing", meshes.windows(2).all(|w| w[1] < w[0]), sci(&meshes, 4)));

    let want: Vec<i64> = id.betti().into_iter().map(|b| b as i64).collect();
    let bad: Vec<i64> = rows.iter().filter(|r| r.betti != want).map(|r| r.level).collect();
    out.push(Check::new("betti numbers", bad.is_empty(), format!("expected {want:?}, mismatched levels {bad:?}")));

    let failed: Vec<i64> = rows.iter().filter(|r| r.model_check == "fail").map(|r| r.level).collect();
    let skipped = rows.iter().filter(|r| r.model_check == "skipped").count();
    out.push(Check::new("model axioms", failed.is_empty(), format!("failed levels {failed:?}, {skipped} skipped above the size cap")));

    let worst = rows.iter().map(|r| r.hodge_residual).fold(0.0, f64::max);
    out.push(Check::new("hodge decomposition", worst <= tol.hodge, format!("largest residual {worst:.3e}")));

    if let ManifoldId::Circle(_) = id {
        let panel: Vec<&ConvergenceRow> = rows.iter().filter(|r| r.top_simplices >= 16).collect();
        let halvings: Vec<f64> =
            panel.windows(2).filter(|w| w[1].level == w[0].level + 1).map(|w| w[0].eigen_error / w[1].eigen_error).collect();
        if !halvings.is_empty() {
            let ok = halvings.iter().all(|&f| f >= tol.eigen_factor);
            out.push(Check::new("eigenvalue error per halving", ok, format!("reduction factors {halvings:.3?}")));
        }
        if let (Some(a), Some(b)) = (panel.first(), panel.last()) {
            if a.level < b.level {
                let order = (a.eigen_error / b.eigen_error).ln() / (a.mesh / b.mesh).ln();
                out.push(Check::new(
                    "eigenvalue order",
                    order >= 1.8,
                    format!("empirical order {order:.4} between N={} and N={}", a.top_simplices, b.top_simplices),
                ));
            }
        }
    }

    let proxy: Vec<&ConvergenceRow> = rows.iter().filter(|r| r.character_error.is_finite()).collect();
    if let [.., prev, last] = proxy.as_slice() {
        let variation = (last.fitted_c - prev.fitted_c).abs() / prev.fitted_c;
        let bounded = proxy.iter().all(|r| r.character_error <= last.fitted_c * r.mesh);
        out.push(Check::new(
            "character error within fitted bound",
            bounded && variation < tol.proxy_c_variation,
            format!(
                "errors {}, C = {:.4e}, variation {variation:.3}",
                sci(&proxy.iter().map(|r| r.character_error).collect::<Vec<_>>(), 3),
                last.fitted_c
            ),
        ));
    }

    if matches!(id, ManifoldId::Circle(_) | ManifoldId::FlatTorus7 | ManifoldId::FlatTorus(..)) {
        let z: Vec<f64> = rows.iter().map(|r| r.partition).collect();
        out.extend(cauchy_check("partition function Cauchy", &z));
        let s: Vec<f64> = rows.iter().map(|r| r.class_sum).collect();
        out.extend(cauchy_check("class sum Cauchy", &s));
        for k in 0..=id.dim() {
            let h: Vec<f64> = rows.iter().map(|r| r.det_h[k]).collect();
            out.extend(cauchy_check(&format!("h determinant Cauchy in degree {k}"), &h));
        }
    }
    out
}
