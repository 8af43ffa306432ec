use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn simchar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_simchar")).args(args).output().expect("simchar runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_string()
}

#[test]
fn build_subdivide_and_measure() {
    let dir = TempDir::new().unwrap();
    let base = path(&dir, "t2.txt");
    let fine = path(&dir, "t2_fine.txt");
    assert_eq!(code(&simchar(&["complex", "build", "t2_flat(7)", "--out", &base])), 0);
    assert!(std::fs::read_to_string(&base).unwrap().starts_with("dim 2 embed 4\n"));
    let o = simchar(&["complex", "subdivide", &base, "--seed", "4", "--scale", "0.2", "--out", &fine]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let m = json(&simchar(&["complex", "measure", &fine]));
    assert_eq!(m["f_vector"], serde_json::json!([7 + 21 + 14, 21 * 2 + 14 * 6, 14 * 6]));
    assert_eq!(m["euler_characteristic"], 0);
    assert_eq!(m["betti"], serde_json::json!([1, 2, 1]));
    assert_eq!(m["oriented"], true);
    assert_eq!(m["orientation_certificate"], true);

    let spectra = path(&dir, "spectra.jsonl");
    assert_eq!(code(&simchar(&["complex", "measure", &base, "--spectra", &spectra])), 0);
    let lines: Vec<Value> = std::fs::read_to_string(&spectra).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 3);
    for (p, line) in lines.iter().enumerate() {
        assert_eq!(line["degree"], p);
        assert_eq!(line["kernel_dim"], line["betti"]);
        assert_eq!(line["h_matrix"].as_array().unwrap().len(), [1, 2, 1][p]);
    }

    let again = path(&dir, "again.txt");
    simchar(&["complex", "subdivide", &base, "--seed", "4", "--scale", "0.2", "--out", &again]);
    assert_eq!(std::fs::read(&fine).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn measure_reports_torsion_of_the_projective_plane() {
    let dir = TempDir::new().unwrap();
    let file = path(&dir, "rp2.txt");
    let text = "dim 2 embed 2\nv 0 0\nv 1 0\nv 0 1\nv 1 1\nv 2 0\nv 0 2\n\
                s 0 1 2\ns 0 2 3\ns 0 3 4\ns 0 4 5\ns 0 1 5\ns 1 2 4\ns 2 3 5\ns 3 4 1\ns 4 5 2\ns 5 1 3\n";
    std::fs::write(&file, text).unwrap();
    let o = simchar(&["complex", "measure", &file]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let m = json(&o);
    assert_eq!(m["oriented"], false);
    assert_eq!(m["euler_characteristic"], 1);
    assert_eq!(m["homology_torsion"][1], serde_json::json!([2]));
}

#[test]
fn verify_model_passes_on_perturbed_subdivisions() {
    for id in ["s1(5)", "t2_flat(7)", "s2_tetra(0)"] {
        let o = simchar(&["verify-model", id, "--seed", "3"]);
        assert_eq!(code(&o), 0, "{id}: {}", String::from_utf8_lossy(&o.stdout));
        let j = json(&o);
        assert_eq!(j["passed"], true);
        assert!(j["stokes"].as_f64().unwrap() <= 1e-12);
    }
}

#[test]
fn midpoint_subdivision_of_an_edge_fails_integrality() {
    let dir = TempDir::new().unwrap();
    let file = path(&dir, "edge.txt");
    std::fs::write(&file, "dim 1 embed 1\nv 0\nv 1\ns 0 1\n").unwrap();
    let o = simchar(&["verify-model", &file, "--unperturbed"]);
    assert_eq!(code(&o), 1);
    let j = json(&o);
    assert_eq!(j["integrality"]["status"], "fail");
    assert_eq!(j["integrality"]["witness"]["multiplier"], 2);
    assert_eq!(j["integrality"]["witness"]["child_integrals"], serde_json::json!([0.5, 0.5]));
}

#[test]
fn grid_check_passes() {
    for (id, p) in [("s1(4)", "0"), ("t2_flat(7)", "1"), ("s2_tetra(0)", "1")] {
        let o = simchar(&["grid-check", id, "--p", p]);
        assert_eq!(code(&o), 0, "{id}: {}", String::from_utf8_lossy(&o.stdout));
        let j = json(&o);
        assert_eq!(j["grid"]["passed"], true);
        assert_eq!(j["exact_sequences"]["passed"], true);
    }
}

#[test]
fn partition_matches_the_oracle() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "result.jsonl");
    let args = ["partition", "s1(6)", "--p", "0", "--action", "maxwell", "--g2", "1.5", "--observable", "const", "--window", "8"];
    let o = simchar(&[&args[..], &["--oracle", "--mc-samples", "0", "--out", &out]].concat());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 1);
    let j: Value = serde_json::from_str(&text).unwrap();
    assert!(j["value"].as_f64().unwrap() > 0.0);
    assert!(j["oracle_relative_error"].as_f64().unwrap() <= 1e-6);

    let wilson = simchar(&["partition", "t2_flat(7)", "--p", "1", "--observable", "wilson:h0:1"]);
    assert_eq!(code(&wilson), 0, "{}", String::from_utf8_lossy(&wilson.stderr));
    assert!(json(&wilson)["value"].as_f64().unwrap().is_finite());
}

fn write_plan(dir: &Path, extra: &str) -> String {
    let plan = dir.join("plan.toml");
    let text = format!("manifold = \"s1(8)\"\nlevels = [0, 1, 2]\nseeds = 5\np = 0\nwindow = 8\nout = \"report.csv\"\n{extra}");
    std::fs::write(&plan, text).unwrap();
    plan.to_str().unwrap().to_string()
}

#[test]
fn run_writes_a_reproducible_report() {
    let dir = TempDir::new().unwrap();
    let plan = write_plan(dir.path(), "");
    let o = simchar(&["run", "--plan", &plan]);
    let log = String::from_utf8_lossy(&o.stdout).to_string();
    assert_eq!(code(&o), 0, "{log}");
    assert!(log.lines().all(|l| l.starts_with("PASS ")), "{log}");
    let report = dir.path().join("report.csv");
    let first = std::fs::read(&report).unwrap();
    assert_eq!(String::from_utf8_lossy(&first).lines().count(), 4);
    assert!(first.starts_with(b"manifold,level,seed,"));

    assert_eq!(code(&simchar(&["run", "--plan", &plan])), 0);
    assert_eq!(std::fs::read(&report).unwrap(), first);

    let jsonl = simchar(&["run", "--plan", &plan, "--format", "jsonl"]);
    assert_eq!(code(&jsonl), 0);
    let text = std::fs::read_to_string(&report).unwrap();
    assert!(text.lines().all(|l| serde_json::from_str::<Value>(l).is_ok()));
}

#[test]
fn failed_invariants_and_errors_have_distinct_exit_codes() {
    let dir = TempDir::new().unwrap();
    let strict = write_plan(dir.path(), "[tolerances]\neigen_factor = 100.0\n");
    let o = simchar(&["run", "--plan", &strict]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL eigenvalue error per halving"));

    assert_eq!(code(&simchar(&["complex", "measure", "s7(3)"])), 2);
    assert_eq!(code(&simchar(&["partition", "s1(6)", "--action", "yang-mills"])), 2);
    let bad = write_plan(dir.path(), "unknown_key = 1\n");
    assert_eq!(code(&simchar(&["run", "--plan", &bad])), 2);
    assert_eq!(code(&simchar(&["no-such-command"])), 2);
    assert_eq!(code(&simchar(&["grid-check", "s1(4)", "--kernel-threshold", "2"])), 2);
    assert_eq!(code(&simchar(&["grid-check", "s1(4)", "--kernel-threshold", "1e-10"])), 0);
}
