//! End-to-end acceptance run. Prints one line per criterion and fails if any
//! criterion does.

use std::io::Write;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use simchar::catalog::ManifoldId;
use simchar::harness::{run_convergence, ReportWriter};
use simchar::plan::{ExperimentPlan, Seeds};
use simchar::report::{emit_report, Format};
use simchar_core::characters::{
    circle_distance, exact_sequence_report, grid_check, verify_model, CharacterModel, CsTriangulation, IntegralityStatus,
};
use simchar_core::complex::{barycentric_subdivide, fixtures, perturbed_subdivide, SimplicialComplex};
use simchar_core::gauge::{partition_function, partition_oracle, theta, times_i, ActionSpec, ObservableSpec, OracleOptions, Truncation};
use simchar_core::hodge::{log_det_from_spectrum, zeta_log_det, HodgeComplex, HodgeOptions, Subspace};
use simchar_core::linalg::{max_abs, Mat};
use simchar_core::whitney::{whitney, Cochain};

/// Written to the stderr handle directly so the lines survive output capture.
fn show(line: String) {
    let _ = writeln!(std::io::stderr(), "{line}");
}

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn complex(id: &str, level: u32) -> Arc<SimplicialComplex> {
    id.parse::<ManifoldId>().unwrap().levels(&[level]).unwrap().remove(0)
}

const CATALOG: [&str; 3] = ["s1(8)", "t2_flat(7)", "s2_tetra(0)"];

fn model(id: &str, p: usize, seed: u64) -> CharacterModel {
    let cs = CsTriangulation::perturbed(complex(id, 0), seed, 0.25, HodgeOptions::default()).unwrap();
    CharacterModel::new(Arc::new(cs), p).unwrap()
}

fn model_axioms() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for id in ["s1(3)", "t2_flat(7)", "s2_tetra(0)"] {
        let base = complex(id, 0);
        let fine = perturbed_subdivide(&base, 17, 0.25).unwrap();
        let r = verify_model(&base, &fine, Some(17)).unwrap();
        let betti = id.parse::<ManifoldId>().unwrap().betti();
        let table = r.de_rham.iter().all(|d| d.passed && d.dim_e == betti[d.degree] && d.dim_f == betti[d.degree]);
        let this = r.passed() && r.stokes <= 1e-12 && r.pairing.passed && table;
        ok &= this;
        notes.push(format!("{id} stokes {:.1e}", r.stokes));
    }
    let edge = Arc::new(fixtures::unit_edge());
    let r = verify_model(&edge, &barycentric_subdivide(&edge).unwrap(), None).unwrap();
    let witness = r.integrality.witness.as_ref().is_some_and(|w| w.child_integrals == [0.5, 0.5] && w.multiplier == Some(2));
    ok &= !r.passed() && r.integrality.status == IntegralityStatus::Fail && witness;
    notes.push(format!("midpoint witness {}", if witness { "found" } else { "missing" }));
    outcome(ok, notes.join(", "))
}

fn rational(rng: &mut ChaCha8Rng) -> BigRational {
    BigRational::new(BigInt::from(rng.random_range(-50i64..=50)), BigInt::from(rng.random_range(1i64..=12)))
}

fn de_rham_inverts_whitney() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut exact = true;
    let mut worst: f64 = 0.0;
    for id in CATALOG {
        let base = complex(id, 0);
        for i in 0..1000 {
            let k = i % (base.dim() + 1);
            let q = Cochain { degree: k, values: (0..base.count(k)).map(|_| rational(&mut rng)).collect() };
            exact &= whitney(&base, &q).unwrap().de_rham_map(&base).unwrap() == q;
            let f = Cochain { degree: k, values: (0..base.count(k)).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<f64>>() };
            let r = whitney(&base, &f).unwrap().de_rham_map(&base).unwrap();
            worst = r.values.iter().zip(&f.values).map(|(a, b)| (a - b).abs()).fold(worst, f64::max);
        }
    }
    outcome(exact && worst <= 1e-12, format!("rational exact: {exact}, float max error {worst:.2e}"))
}

fn hodge_decomposition() -> Outcome {
    let (mut sum, mut orth) = (0.0f64, 0.0f64);
    let mut dims = true;
    for id in CATALOG {
        let mid: ManifoldId = id.parse().unwrap();
        for x in mid.levels(&[0, 1, 2]).unwrap() {
            let hc = HodgeComplex::with_computed_topology(x, HodgeOptions::default()).unwrap();
            for p in 0..=hc.dim() {
                let f = hc.frame(p).unwrap();
                let (h, e, c) = (f.harmonic_projector(), f.exact_projector(), f.coexact_projector());
                let n = h.nrows();
                sum = sum.max(max_abs(&(&h + &e + &c - Mat::identity(n, n))));
                orth = [&h * &e, &h * &c, &e * &c].iter().map(max_abs).fold(orth, f64::max);
                dims &= f.harmonic_basis.ncols() == mid.betti()[p];
            }
        }
    }
    outcome(sum <= 1e-9 && orth <= 1e-9 && dims, format!("projector sum {sum:.1e}, orthogonality {orth:.1e}, dim H = b: {dims}"))
}

fn exact_sequences() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for id in CATALOG {
        for p in [0, 1] {
            let cs = Arc::new(CsTriangulation::perturbed(complex(id, 0), 5, 0.25, HodgeOptions::default()).unwrap());
            let g = grid_check(&cs, p).unwrap();
            let e = exact_sequence_report(&CharacterModel::new(cs, p).unwrap()).unwrap();
            let sums = g.alternating_sums().iter().all(|&s| s == (0, 0));
            let this = g.passed() && e.passed() && sums;
            ok &= this;
            if !this {
                notes.push(format!("{id} p={p} failed"));
            }
        }
    }
    outcome(ok, if notes.is_empty() { "grid and sequences exact for p = 0, 1".into() } else { notes.join(", ") })
}

fn spark_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut spark, mut cert, mut z) = (0.0f64, 0.0f64, 0.0f64);
    let mut ok = true;
    for (id, p) in [("s1(8)", 0), ("t2_flat(7)", 1), ("s2_tetra(0)", 1)] {
        let m = model(id, p, 3);
        for _ in 0..100 {
            let ch = m.random(&mut rng, 0.5);
            let sp = m.to_spark(&ch);
            let (res, closed) = m.spark_residual(&sp);
            spark = spark.max(res);
            ok &= closed;
            let back = m.from_spark(&sp).unwrap();
            ok &= back.c == ch.c;
            z = back.z.iter().zip(&ch.z).map(|(a, b)| circle_distance(a - b)).fold(z, f64::max);
            match m.equivalence_certificate(&sp, &m.to_spark(&back)).unwrap() {
                Some(c) => {
                    ok &= c.holds(1e-9);
                    cert = cert.max(c.residual);
                }
                None => ok = false,
            }
        }
    }
    outcome(
        ok && spark <= 1e-10 && cert <= 1e-9,
        format!("spark residual {spark:.1e}, certificate residual {cert:.1e}, torus drift {z:.1e}"),
    )
}

fn theta_and_determinants() -> Outcome {
    let t = theta(&times_i(&Mat::identity(1, 1)), 1).unwrap().value;
    let direct: f64 = (-8i32..=8).map(|v| (-std::f64::consts::PI * (v * v) as f64).exp()).sum();
    let theta_err = (t.re - direct).abs().max(t.im.abs());

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut zeta_err: f64 = 0.0;
    for _ in 0..100 {
        let d: Vec<f64> = (0..rng.random_range(1..40)).map(|_| rng.random_range(0.01..100.0)).collect();
        zeta_err = zeta_err.max((zeta_log_det(&d) - log_det_from_spectrum(&d)).abs());
    }
    let (mut block_err, mut susy): (f64, f64) = (0.0, 0.0);
    for id in CATALOG {
        for level in [0, 1] {
            let hc = HodgeComplex::with_computed_topology(complex(id, level), HodgeOptions::default()).unwrap();
            for p in 0..=hc.dim() {
                for s in [Subspace::Coexact, Subspace::Exact] {
                    let r = hc.restricted_determinant(p, s).unwrap();
                    block_err = block_err.max((r.zeta_log_det - r.log_det).abs());
                }
                susy = susy.max(hc.supersymmetry_residual(p).unwrap());
            }
        }
    }
    let ok = theta_err <= 1e-10 && zeta_err <= 1e-10 && block_err <= 1e-10 && susy <= 1e-8;
    outcome(ok, format!("theta {theta_err:.1e}, zeta on diagonals {zeta_err:.1e}, on blocks {block_err:.1e}, supersymmetry {susy:.1e}"))
}

fn oracle_agreement() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    let a = ActionSpec::maxwell(1.0).unwrap();
    for (id, level, p) in [("s1(8)", 0, 0), ("s2_tetra(1)", 0, 1)] {
        let cs = CsTriangulation::perturbed(complex(id, level), 13, 0.25, HodgeOptions::default()).unwrap();
        let m = CharacterModel::new(Arc::new(cs), p).unwrap();
        let z = partition_function(&m, &a, &ObservableSpec::Constant, Truncation::default()).unwrap();
        let options = OracleOptions { mc_samples: 1_000_000, seed: 7, ..OracleOptions::default() };
        let o = partition_oracle(&m, &a, &ObservableSpec::Constant, z.truncation.radius, options).unwrap();
        let quad = ((o.quadrature - z.value) / z.value).abs();
        let mc = ((o.monte_carlo.unwrap() - z.value) / z.value).abs();
        ok &= quad <= 1e-6 && mc <= 0.02;
        notes.push(format!("{id} p={p}: quadrature {quad:.1e}, Monte Carlo {:.2}%", 100.0 * mc));
    }
    outcome(ok, notes.join("; "))
}

fn plans() -> Vec<ExperimentPlan> {
    let mut s1 = ExperimentPlan::new("s1(8)", vec![0, 1, 2, 3]);
    s1.seeds = Seeds::One(11);
    let mut t2 = ExperimentPlan::new("t2_flat(7)", vec![0, 1, 2, 3]);
    t2.seeds = Seeds::One(11);
    t2.p = 1;
    vec![s1, t2]
}

/// Streams the CSV while running and writes JSON lines afterwards.
fn reports(plan: &ExperimentPlan) -> (Vec<u8>, Vec<u8>, simchar::ConvergenceOutcome) {
    let mut csv = Vec::new();
    let out = {
        let mut w = ReportWriter::new(&mut csv, Format::Csv, false).unwrap();
        run_convergence(plan, |r| w.write(r)).unwrap()
    };
    let mut again = Vec::new();
    emit_report(&out.rows, None, Format::Csv, &mut again).unwrap();
    assert_eq!(csv, again, "streamed and batch CSV differ");
    let mut jsonl = Vec::new();
    emit_report(&out.rows, None, Format::Jsonl, &mut jsonl).unwrap();
    (csv, jsonl, out)
}

fn convergence(first: &[(Vec<u8>, Vec<u8>, simchar::ConvergenceOutcome)]) -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for (_, _, out) in first {
        let id = &out.rows[0].manifold;
        for c in &out.checks {
            show(format!("    {id} {} {}: {}", if c.passed { "pass" } else { "FAIL" }, c.name, c.detail));
        }
        ok &= out.passed();
        let wanted: &[&str] = if id.starts_with("s1") {
            &["eigenvalue order", "eigenvalue error per halving", "character error within fitted bound", "partition function Cauchy"]
        } else {
            &["partition function Cauchy", "h determinant Cauchy in degree 1"]
        };
        for w in wanted {
            let present = out.checks.iter().any(|c| c.name == *w);
            ok &= present;
            if !present {
                notes.push(format!("{id}: `{w}` was not checked"));
            }
        }
        notes.push(format!("{id}: {}/{} checks", out.checks.iter().filter(|c| c.passed).count(), out.checks.len()));
    }
    outcome(ok, notes.join(", "))
}

fn determinism(first: &[(Vec<u8>, Vec<u8>, simchar::ConvergenceOutcome)]) -> Outcome {
    let mut ok = true;
    let mut bytes = 0;
    for (plan, (csv, jsonl, _)) in plans().iter().zip(first) {
        let (csv2, jsonl2, _) = reports(plan);
        ok &= *csv == csv2 && *jsonl == jsonl2;
        bytes += csv.len() + jsonl.len();
    }
    outcome(ok, format!("{bytes} bytes compared"))
}

fn timed<F: FnOnce() -> Outcome>(f: F) -> (Outcome, Duration) {
    let t = Instant::now();
    let o = f();
    (o, t.elapsed())
}

#[test]
fn acceptance() {
    show(String::new());
    let mut results = Vec::new();
    let mut report = |n: usize, limit: Option<u64>, (o, t): (Outcome, Duration)| {
        let in_time = limit.map_or(true, |s| t.as_secs_f64() < s as f64);
        let passed = o.passed && in_time;
        let limit = limit.map_or(String::new(), |s| format!(" (limit {s} s)"));
        show(format!("criterion {n}: {} {} [{:.1} s{limit}]", if passed { "PASS" } else { "FAIL" }, o.detail, t.as_secs_f64()));
        results.push((n, passed));
    };
    report(1, Some(10), timed(model_axioms));
    report(2, Some(5), timed(de_rham_inverts_whitney));
    report(3, Some(60), timed(hodge_decomposition));
    report(4, Some(60), timed(exact_sequences));
    report(5, Some(30), timed(spark_round_trip));
    report(6, Some(10), timed(theta_and_determinants));
    report(7, Some(300), timed(oracle_agreement));
    let start = Instant::now();
    let first: Vec<_> = plans().iter().map(reports).collect();
    let elapsed = start.elapsed();
    let (o, t) = timed(|| convergence(&first));
    report(8, Some(600), (o, t + elapsed));
    report(9, None, timed(|| determinism(&first)));
    let failed: Vec<usize> = results.iter().filter(|r| !r.1).map(|r| r.0).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
