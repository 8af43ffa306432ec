//! The `simchar` command line.
//!
//! Every command that takes a complex accepts either a catalog id such as
//! `s1(8)` or a path to a complex file. Exit codes: 0 when every checked
//! invariant holds, 1 when one fails, 2 on errors.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value as Json};
use simchar_core::characters::{exact_sequence_report, grid_check, verify_model, CharacterModel, CsTriangulation, IntegralityStatus};
use simchar_core::complex::{barycentric_subdivide, perturbed_subdivide, regular_subdivide, BuildOptions, SimplicialComplex};
use simchar_core::exact::Topology;
use simchar_core::gauge::{partition_function, partition_function_base, partition_oracle, OracleOptions, Truncation};
use simchar_core::hodge::{HodgeComplex, HodgeOptions};

use crate::catalog::ManifoldId;
use crate::format::{read_complex_with, write_complex};
use crate::harness::{run_convergence, ReportWriter};
use crate::plan::{parse_action, ExperimentPlan, ObservableChoice};
use crate::report::{json_object, Format, Record, Value};
use crate::Result;

#[derive(Debug, Parser)]
#[command(name = "simchar", version, about = "Discrete differential characters and simplicial abelian gauge theory")]
pub struct Cli {
    /// Eigenvalues below this multiple of the largest one count as zero.
    #[arg(long, global = true, default_value_t = 1e-12)]
    pub kernel_threshold: f64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build, subdivide and measure complexes.
    #[command(subcommand)]
    Complex(ComplexCommand),
    /// Check the model axioms on a perturbed subdivision.
    VerifyModel(ModelArgs),
    /// Check the exact sequences and the commutative grid in one degree.
    GridCheck(GridArgs),
    /// Evaluate the partition function.
    Partition(PartitionArgs),
    /// Run a convergence plan.
    Run(RunArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Mode {
    Perturbed,
    Barycentric,
    Regular,
}

#[derive(Debug, Args)]
pub struct Perturbation {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Perturbation size relative to the local simplex.
    #[arg(long, default_value_t = 0.25)]
    pub scale: f64,
}

#[derive(Debug, Subcommand)]
pub enum ComplexCommand {
    /// Write a catalog complex, refined `--level` times.
    Build {
        id: String,
        #[arg(long, default_value_t = 0)]
        level: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Subdivide a complex once.
    Subdivide {
        input: String,
        #[arg(long, value_enum, default_value = "perturbed")]
        mode: Mode,
        #[command(flatten)]
        perturbation: Perturbation,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print sizes, shape regularity and homology as JSON.
    Measure {
        input: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write one JSON line per degree with the Laplacian spectrum,
        /// the Betti number and the period matrix `h`.
        #[arg(long)]
        spectra: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    pub input: String,
    #[command(flatten)]
    pub perturbation: Perturbation,
    /// Use the plain barycentric subdivision instead.
    #[arg(long)]
    pub unperturbed: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    pub input: String,
    #[arg(long, default_value_t = 0)]
    pub p: usize,
    #[command(flatten)]
    pub perturbation: Perturbation,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PartitionArgs {
    pub input: String,
    #[arg(long, default_value_t = 0)]
    pub p: usize,
    #[arg(long, default_value = "maxwell")]
    pub action: String,
    /// Coupling `g²`.
    #[arg(long, default_value_t = 1.0)]
    pub g2: f64,
    /// `const`, `wilson:h<j>:<q>` or `wilson:<chain>:<q>`.
    #[arg(long, default_value = "const")]
    pub observable: String,
    /// Starting radius of the class-sum window.
    #[arg(long, default_value_t = 8)]
    pub window: usize,
    #[command(flatten)]
    pub perturbation: Perturbation,
    /// Also evaluate the brute-force oracle.
    #[arg(long)]
    pub oracle: bool,
    #[arg(long, default_value_t = 100_000)]
    pub mc_samples: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub plan: PathBuf,
    /// Overrides the format implied by the output extension.
    #[arg(long)]
    pub format: Option<String>,
}

/// A catalog id, or else a complex file.
/// Files may describe complexes with boundary or without an orientation;
/// commands that need either property fail on their own.
pub fn load_complex(input: &str) -> Result<SimplicialComplex> {
    match input.parse::<ManifoldId>() {
        Ok(id) => id.base_complex(),
        Err(_) if Path::new(input).exists() || !input.contains('(') => {
            let options = BuildOptions { allow_boundary: true, allow_non_orientable: true, ..BuildOptions::default() };
            read_complex_with(&std::fs::read_to_string(input)?, &options)
        }
        Err(e) => Err(e),
    }
}

fn output(out: &Option<PathBuf>, stdout: &mut dyn Write, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn pretty(j: &Json) -> String {
    let mut s = serde_json::to_string_pretty(j).expect("JSON values serialize");
    s.push('\n');
    s
}

/// Runs one command; `Ok(false)` means an invariant failed.
pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<bool> {
    if !(cli.kernel_threshold > 0.0 && cli.kernel_threshold < 1.0) {
        return Err(crate::HarnessError::Argument("kernel threshold must lie in (0, 1)".into()));
    }
    let options = HodgeOptions { kernel_threshold: cli.kernel_threshold };
    match cli.command {
        Command::Complex(c) => complex(c, options, stdout),
        Command::VerifyModel(a) => verify(a, stdout),
        Command::GridCheck(a) => grid(a, options, stdout),
        Command::Partition(a) => partition(a, options, stdout),
        Command::Run(a) => run_plan(a, options, stdout),
    }
}

fn spectral_report(x: SimplicialComplex, options: HodgeOptions) -> Result<String> {
    let hc = HodgeComplex::with_computed_topology(Arc::new(x), options)?;
    let floats = |v: &[f64]| Value::Floats(v.to_vec()).to_json();
    let mut lines = String::new();
    for p in 0..=hc.dim() {
        let s = hc.spectral_summary(p)?;
        let j = json!({
            "degree": p,
            "betti": s.betti,
            "kernel_dim": hc.frame(p)?.harmonic_basis.ncols(),
            "up_eigenvalues": floats(&s.up),
            "down_eigenvalues": floats(&s.down),
            "h_matrix": s.h_matrix.iter().map(|row| floats(row)).collect::<Vec<_>>(),
        });
        lines.push_str(&serde_json::to_string(&j).expect("JSON values serialize"));
        lines.push('\n');
    }
    Ok(lines)
}

fn complex(c: ComplexCommand, options: HodgeOptions, stdout: &mut dyn Write) -> Result<bool> {
    match c {
        ComplexCommand::Build { id, level, out } => {
            let id: ManifoldId = id.parse()?;
            let x = id.levels(&[level])?.remove(0);
            output(&out, stdout, &write_complex(&x))?;
        }
        ComplexCommand::Subdivide { input, mode, perturbation, out } => {
            let x = Arc::new(load_complex(&input)?);
            let y = match mode {
                Mode::Perturbed => perturbed_subdivide(&x, perturbation.seed, perturbation.scale)?,
                Mode::Barycentric => barycentric_subdivide(&x)?,
                Mode::Regular => regular_subdivide(&x)?,
            };
            output(&out, stdout, &write_complex(&y))?;
        }
        ComplexCommand::Measure { input, out, spectra } => {
            let x = load_complex(&input)?;
            if let Some(path) = spectra {
                std::fs::write(path, spectral_report(x.clone(), options)?)?;
            }
            let t = Topology::compute(&x)?;
            let torsion: Vec<Vec<u64>> =
                (0..=x.dim()).map(|k| t.degree(k).map(|d| d.homology_torsion.clone())).collect::<std::result::Result<_, _>>()?;
            let j = json!({
                "dim": x.dim(),
                "embed_dim": x.embed_dim(),
                "f_vector": x.f_vector(),
                "euler_characteristic": x.euler_characteristic(),
                "oriented": x.is_oriented(),
                "orientation_certificate": crate::catalog::orientation_certificate(&x),
                "mesh": x.mesh(),
                "fullness": x.fullness(),
                "volume": x.total_volume(),
                "betti": t.bettis(),
                "homology_torsion": torsion,
            });
            output(&out, stdout, &pretty(&j))?;
        }
    }
    Ok(true)
}

fn verify(a: ModelArgs, stdout: &mut dyn Write) -> Result<bool> {
    let base = Arc::new(load_complex(&a.input)?);
    let (fine, seed) = if a.unperturbed {
        (barycentric_subdivide(&base)?, None)
    } else {
        (perturbed_subdivide(&base, a.perturbation.seed, a.perturbation.scale)?, Some(a.perturbation.seed))
    };
    let r = verify_model(&base, &fine, seed)?;
    let status = match r.integrality.status {
        IntegralityStatus::Pass => "pass",
        IntegralityStatus::HeuristicPass => "heuristic-pass",
        IntegralityStatus::Fail => "fail",
    };
    let witness = r.integrality.witness.as_ref().map(|w| {
        json!({
            "degree": w.degree,
            "simplex": w.simplex,
            "vertices": w.vertices,
            "child_integrals": w.child_integrals,
            "pair": [w.pair.0, w.pair.1],
            "relation": [w.relation.0, w.relation.1],
            "multiplier": w.multiplier,
        })
    });
    let j = json!({
        "passed": r.passed(),
        "seed": r.seed,
        "freeness": r.freeness,
        "freeness_witness": r.freeness_witness,
        "pairing": {
            "passed": r.pairing.passed,
            "ranks": r.pairing.ranks,
            "min_singular_ratio": r.pairing.min_singular_ratio,
        },
        "integrality": {
            "status": status,
            "pairs_tested": r.integrality.pairs_tested,
            "max_coeff": r.integrality.max_coeff,
            "witness": witness,
        },
        "stokes": r.stokes,
        "de_rham": r.de_rham.iter().map(|d| json!({
            "degree": d.degree, "dim_e": d.dim_e, "dim_f": d.dim_f, "period_rank": d.period_rank, "passed": d.passed,
        })).collect::<Vec<_>>(),
    });
    output(&a.out, stdout, &pretty(&j))?;
    Ok(r.passed())
}

fn grid(a: GridArgs, options: HodgeOptions, stdout: &mut dyn Write) -> Result<bool> {
    let base = Arc::new(load_complex(&a.input)?);
    let cs = Arc::new(CsTriangulation::perturbed(base, a.perturbation.seed, a.perturbation.scale, options)?);
    let g = grid_check(&cs, a.p)?;
    let model = CharacterModel::new(cs, a.p)?;
    let e = exact_sequence_report(&model)?;
    let groups: Vec<Vec<Json>> = g
        .groups
        .iter()
        .map(|row| {
            row.iter()
                .map(|s| json!({"name": s.name, "vector_dim": s.vector_dim, "torus_dim": s.torus_dim, "lattice_rank": s.lattice_rank, "finite_order": s.finite_order}))
                .collect()
        })
        .collect();
    let passed = g.passed() && e.passed();
    let j = json!({
        "passed": passed,
        "degree": a.p,
        "grid": {
            "passed": g.passed(),
            "groups": groups,
            "rows_exact": g.rows_exact,
            "columns_exact": g.columns_exact,
            "alternating_sums": g.alternating_sums(),
            "q_residual": g.q_residual,
        },
        "exact_sequences": {
            "passed": e.passed(),
            "kernel_torus": [e.kernel_torus.0, e.kernel_torus.1],
            "kernel_finite": [e.kernel_finite.0, e.kernel_finite.1],
            "delta2_ranks": [e.delta2_ranks.0, e.delta2_ranks.1],
            "delta2_surjective": e.delta2_surjective,
            "delta1_surjective": e.delta1_surjective,
            "q_residual": e.q_residual,
            "ladder_residual": e.ladder_residual,
        },
    });
    output(&a.out, stdout, &pretty(&j))?;
    Ok(passed)
}

fn partition(a: PartitionArgs, options: HodgeOptions, stdout: &mut dyn Write) -> Result<bool> {
    let base = Arc::new(load_complex(&a.input)?);
    let action = parse_action(&a.action, a.g2)?;
    let choice: ObservableChoice = a.observable.parse()?;
    let truncation = Truncation { radius: a.window, ..Truncation::default() };
    let (seed, scale) = (a.perturbation.seed, a.perturbation.scale);
    let (z, oracle) = if choice.is_constant() && !a.oracle {
        let hc = HodgeComplex::with_computed_topology(base, options)?;
        (partition_function_base(&hc, a.p, &action, truncation)?, None)
    } else {
        let cs = Arc::new(CsTriangulation::perturbed(base, seed, scale, options)?);
        let model = CharacterModel::new(cs, a.p)?;
        let obs = choice.resolve(&model)?;
        let z = partition_function(&model, &action, &obs, truncation)?;
        let oracle = if a.oracle {
            let options = OracleOptions { mc_samples: a.mc_samples, seed, ..OracleOptions::default() };
            Some(partition_oracle(&model, &action, &obs, z.truncation.radius.min(a.window), options)?)
        } else {
            None
        };
        (z, oracle)
    };
    let f = Value::Float;
    let mut rec: Record = vec![
        ("input".into(), Value::Text(a.input.clone())),
        ("p".into(), Value::Int(a.p as i64)),
        ("action".into(), Value::Text(a.action.clone())),
        ("g2".into(), f(a.g2)),
        ("observable".into(), Value::Text(a.observable.clone())),
        ("seed".into(), Value::Int(seed as i64)),
        ("value".into(), f(z.value)),
        ("log_abs".into(), f(z.log_abs)),
        ("sign".into(), f(z.sign)),
        ("log_prefactor".into(), f(z.log_prefactor)),
        ("log_gaussian".into(), f(z.log_gaussian)),
        ("slab_dim".into(), Value::Int(z.slab_dim as i64)),
        ("class_sum".into(), f(z.class_sum)),
        ("radius".into(), Value::Int(z.truncation.radius as i64)),
        ("tail_bound".into(), f(z.truncation.tail_bound)),
        ("terms".into(), Value::Int(z.truncation.terms as i64)),
    ];
    let mut passed = z.value.is_finite() && z.truncation.tail_bound <= z.truncation.tolerance;
    if let Some(o) = &oracle {
        let rel = (o.quadrature - z.value).abs() / z.value.abs().max(f64::MIN_POSITIVE);
        passed &= rel <= 1e-6;
        rec.push(("oracle_quadrature".into(), f(o.quadrature)));
        rec.push(("oracle_relative_error".into(), f(rel)));
        if let (Some(mc), Some(se)) = (o.monte_carlo, o.mc_std_error) {
            rec.push(("oracle_monte_carlo".into(), f(mc)));
            rec.push(("oracle_mc_std_error".into(), f(se)));
        }
    }
    let mut j = json_object(&rec);
    let f = |x: f64| Value::Float(x).to_json();
    let breakdown = z.prefactor_breakdown.iter().map(|t| {
        json!({
            "degree": t.degree,
            "exponent": t.exponent,
            "betti": t.betti,
            "log_det_h": f(t.log_det_h),
            "torsion_order": t.torsion_order,
            "laplacian_dim": t.laplacian_dim,
            "log_det_laplacian": f(t.log_det_laplacian),
            "laplacian_exponent": f(t.laplacian_exponent),
        })
    });
    j.insert("prefactor_breakdown".into(), Json::Array(breakdown.collect()));
    output(&a.out, stdout, &(Json::Object(j).to_string() + "\n"))?;
    Ok(passed)
}

fn run_plan(a: RunArgs, options: HodgeOptions, stdout: &mut dyn Write) -> Result<bool> {
    let mut plan = ExperimentPlan::load(&a.plan)?;
    if options != HodgeOptions::default() {
        plan.tolerances.kernel_threshold = options.kernel_threshold;
    }
    let format = match (&a.format, &plan.out) {
        (Some(f), _) => f.parse()?,
        (None, Some(out)) => Format::from_path(out),
        (None, None) => Format::Csv,
    };
    let outcome = match &plan.out {
        Some(path) => {
            let mut w = ReportWriter::new(BufWriter::new(File::create(path)?), format, plan.record_timings)?;
            run_convergence(&plan, |r| w.write(r))?
        }
        None => {
            let mut w = ReportWriter::new(&mut *stdout, format, plan.record_timings)?;
            run_convergence(&plan, |r| w.write(r))?
        }
    };
    let mut log: Box<dyn Write> = if plan.out.is_some() { Box::new(&mut *stdout) } else { Box::new(std::io::stderr()) };
    for c in &outcome.checks {
        writeln!(log, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail)?;
    }
    Ok(outcome.passed())
}
