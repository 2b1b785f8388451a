mod common;

use std::path::{Path, PathBuf};
use std::process::Command;

use common::*;
use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_sparse2stage");

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(BIN).args(args).env_remove("RUST_LOG").output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap(), String::from_utf8(out.stderr).unwrap())
}

fn schema(kind: &str) -> jsonschema::Validator {
    let text = std::fs::read_to_string(root().join("schemas").join(format!("{kind}.schema.json"))).unwrap();
    jsonschema::validator_for(&serde_json::from_str(&text).unwrap()).unwrap()
}

/// Parses stdout as exactly one JSON document and validates it.
fn check(stdout: &str, kind: &str) -> Value {
    let doc: Value = serde_json::from_str(stdout).unwrap_or_else(|e| panic!("not a single JSON document: {e}\n{stdout}"));
    assert_eq!(doc["schema_version"], "1.0.0");
    assert_eq!(doc["kind"], kind);
    let v = schema(kind);
    let errors: Vec<String> = v.iter_errors(&doc).map(|e| format!("{} at {}", e, e.instance_path())).collect();
    assert!(errors.is_empty(), "{kind}: {errors:?}");
    doc
}

fn write_csv(path: &Path, rows: &[Vec<f64>]) {
    let mut w = csv::Writer::from_path(path).unwrap();
    for r in rows {
        w.write_record(r.iter().map(|v| format!("{v:e}"))).unwrap();
    }
    w.flush().unwrap();
}

struct Data {
    _dir: tempfile::TempDir,
    x: String,
    y: String,
    w: String,
    dir: PathBuf,
}

fn data() -> Data {
    let dir = tempfile::tempdir().unwrap();
    let mut r = rng(60);
    let (n, p) = (30, 8);
    let x = gaussian_matrix(&mut r, n, p);
    let beta = [2.0, -1.5, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0];
    let noise = gaussian_vec(&mut r, n);
    let y: Vec<f64> = (0..n).map(|i| (0..p).map(|j| x[(i, j)] * beta[j]).sum::<f64>() + 0.3 * noise[i]).collect();
    let xp = dir.path().join("x.csv");
    let yp = dir.path().join("y.csv");
    let wp = dir.path().join("w.csv");
    write_csv(&xp, &(0..n).map(|i| x.row(i).iter().copied().collect()).collect::<Vec<_>>());
    write_csv(&yp, &y.iter().map(|v| vec![*v]).collect::<Vec<_>>());
    write_csv(&wp, &(0..p).map(|j| vec![0.5 + j as f64 * 0.25]).collect::<Vec<_>>());
    Data {
        x: xp.to_str().unwrap().into(),
        y: yp.to_str().unwrap().into(),
        w: wp.to_str().unwrap().into(),
        dir: dir.path().to_path_buf(),
        _dir: dir,
    }
}

fn scenario(name: &str) -> String {
    root().join("scenarios").join(name).to_str().unwrap().to_string()
}

#[test]
fn solve_emits_fit_result() {
    let d = data();
    let (code, out, _) = run(&["solve", "--design", &d.x, "--response", &d.y, "--lambda-init", "0.2"]);
    assert_eq!(code, 0);
    let doc = check(&out, "fit_result");
    assert_eq!(doc["converged"], true);
    let (code, out, _) = run(&["solve", "--design", &d.x, "--response", &d.y, "--lambda-init", "0.2", "--weights", &d.w]);
    assert_eq!(code, 0);
    check(&out, "fit_result");
}

#[test]
fn two_stage_emits_results() {
    let d = data();
    let (code, out, err) = run(&["two-stage", "--design", &d.x, "--response", &d.y, "--method", "adaptive", "--lambda-init", "0.2", "--lambda-adap", "0.5"]);
    assert_eq!(code, 0, "{err}");
    let doc = check(&out, "two_stage_result");
    assert_eq!(doc["method"], "adaptive");
    let (code, out, err) = run(&["two-stage", "--design", &d.x, "--response", &d.y, "--method", "threshold", "--lambda-init", "0.2", "--tuning", "AA", "--s0", "0,1,4"]);
    assert_eq!(code, 0, "{err}");
    check(&out, "two_stage_result");
}

#[test]
fn eigen_emits_every_quantity() {
    let d = data();
    let (code, out, err) = run(&[
        "eigen",
        "--design",
        &d.x,
        "--quantity",
        "lambda-max,lambda-set,sparse-max,sparse-min,restricted,restricted-min,condition-d",
        "--set",
        "0,1",
        "--L",
        "2",
        "--N",
        "3",
        "--restarts",
        "8",
    ]);
    assert_eq!(code, 0, "{err}");
    let doc = check(&out, "eigen_report");
    for key in ["lambda_max", "set_extremes", "sparse_max", "sparse_min", "restricted", "restricted_min", "condition_d"] {
        assert!(!doc[key].is_null(), "{key} missing");
    }
}

#[test]
fn oracle_and_irrep_reports() {
    let (code, out, err) = run(&["oracle", "--scenario", &scenario("noiseless_small.json")]);
    assert_eq!(code, 0, "{err}");
    check(&out, "oracle_solution");
    let (code, out, err) = run(&["irrep", "--example", "3", "8", "0.5"]);
    assert_eq!(code, 0, "{err}");
    let doc = check(&out, "irrep_report");
    // uniform c₁ and c₂ = e₁ with unit weights: ρ √3 / 1
    let m = doc["measure"].as_f64().unwrap();
    assert!((m - 0.5 * 3f64.sqrt()).abs() < 1e-10, "{m}");
}

#[test]
fn simulate_and_dashboard() {
    let d = data();
    let csv = d.dir.join("m.csv");
    let (code, out, err) = run(&["simulate", "--scenario", &scenario("noiseless_small.json"), "--replications", "2", "--csv", csv.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    check(&out, "simulation_report");
    assert!(std::fs::read_to_string(&csv).unwrap().lines().count() > 1);
    let (code, out, err) = run(&[
        "dashboard",
        "--scenario",
        &scenario("noiseless_small.json"),
        "--sweep",
        r#"{"kind":"sample_size","values":[60,80]}"#,
        "--replications",
        "2",
    ]);
    assert_eq!(code, 0, "{err}");
    check(&out, "dashboard");
}

#[test]
fn verify_bounds_writes_report_and_summary() {
    let d = data();
    let path = d.dir.join("bounds.json");
    let (code, out, err) = run(&["verify-bounds", "--scenario", &scenario("noiseless_small.json"), "--replications", "2", "--out", path.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let doc = check(&out, "verify_summary");
    assert!(doc.to_string().contains("fail"));
    let text = std::fs::read_to_string(&path).unwrap();
    let report = check(&text, "bound_report");
    assert!(report.to_string().contains("\"status\""));
}

#[test]
fn scenario_files_match_their_schema() {
    let v = schema("scenario");
    for entry in std::fs::read_dir(root().join("scenarios")).unwrap() {
        let path = entry.unwrap().path();
        let doc: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        let errors: Vec<String> = v.iter_errors(&doc).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{}: {errors:?}", path.display());
    }
}

#[test]
fn usage_errors_exit_with_two() {
    let d = data();
    assert_eq!(run(&["solve", "--no-such-flag"]).0, 2);
    assert_eq!(run(&["frobnicate"]).0, 2);
    assert_eq!(run(&["solve", "--design", &d.x, "--response", &d.y, "--lambda-init", "-1"]).0, 2);
    let bad = d.dir.join("bad.json");
    std::fs::write(&bad, "{\"n\": 10").unwrap();
    let (code, out, err) = run(&["simulate", "--scenario", bad.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(out.is_empty());
    assert!(!err.is_empty());
}

#[test]
fn numerical_failure_exits_with_three() {
    let d = data();
    let (code, out, _) = run(&["--strict", "solve", "--design", &d.x, "--response", &d.y, "--lambda-init", "0.01", "--max-iter", "1", "--tol", "1e-14"]);
    assert_eq!(code, 3);
    assert!(out.is_empty());
    // without --strict the same fit is reported with its flag
    let (code, out, _) = run(&["solve", "--design", &d.x, "--response", &d.y, "--lambda-init", "0.01", "--max-iter", "1", "--tol", "1e-14"]);
    assert_eq!(code, 0);
    assert_eq!(check(&out, "fit_result")["converged"], false);
}

#[test]
fn in_process_dispatch_matches_the_binary() {
    let d = data();
    let args = ["sparse2stage", "solve", "--design", &d.x, "--response", &d.y, "--lambda-init", "0.3"];
    let mut buf = Vec::new();
    assert_eq!(sparse2stage::cli::dispatch(args, &mut buf), 0);
    let (_, out, _) = run(&args[1..]);
    assert_eq!(String::from_utf8(buf).unwrap(), out);
}
