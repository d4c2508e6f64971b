use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn ucgl(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ucgl"))
        .args(args)
        .env("UCGL_ROOT_CACHE", cache)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

#[test]
fn verify_passes_and_reproduces() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["verify", "--n", "2", "--suite", "all", "--seed", "42", "--no-timing"];
    let first = ucgl(dir.path(), &args);
    let second = ucgl(dir.path(), &args);
    assert_eq!(code(&first), 0, "{}", String::from_utf8_lossy(&first.stderr));
    assert_eq!(first.stdout, second.stdout);
    let report = json(&first);
    assert!(report.get("timing_seconds").is_none());
    assert!(report["checks"].as_array().unwrap().iter().all(|c| c["pass"] == Value::Bool(true)));
}

#[test]
fn failing_report_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = ucgl(dir.path(), &["verify", "--n", "2", "--suite", "stokes", "--tol", "0", "--samples", "5"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("FAIL stokes."));
    assert_eq!(json(&out)["checks"][0]["tol"], 0.0);
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&ucgl(dir.path(), &["verify", "--n", "2", "--suite", "everything"])), 2);
    assert_eq!(code(&ucgl(dir.path(), &["verify", "--suite", "stokes"])), 2);
    assert_eq!(code(&ucgl(dir.path(), &["verify", "--n", "0"])), 2);
    let missing = dir.path().join("absent.json");
    assert_eq!(code(&ucgl(dir.path(), &["verify", "--config", missing.to_str().unwrap()])), 2);
}

#[test]
fn exhausted_search_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let out_file = dir.path().join("r.json");
    let out = ucgl(dir.path(), &["derive-roots", "--n", "5", "--budget", "0", "--out", out_file.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
    assert!(!out_file.exists());
}

#[test]
fn derive_roots_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let out_file = dir.path().join("roots_n3.json");
    let out = ucgl(dir.path(), &["derive-roots", "--n", "3", "--out", out_file.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let roots: Value = serde_json::from_str(&std::fs::read_to_string(&out_file).unwrap()).unwrap();
    assert_eq!(roots["n"], 3);
    assert!(roots["survivor_count"].as_u64().unwrap() >= 1);
    assert_eq!(roots["R1"].as_array().unwrap().len(), 2);
}

#[test]
fn sample_slocal_writes_points() {
    let dir = tempfile::tempdir().unwrap();
    let out_file = dir.path().join("points.json");
    let out = ucgl(dir.path(), &["sample-slocal", "--n", "2", "--seed", "3", "--count", "4", "--out", out_file.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let points: Value = serde_json::from_str(&std::fs::read_to_string(&out_file).unwrap()).unwrap();
    let points = points.as_array().unwrap();
    assert_eq!(points.len(), 4);
    assert_eq!(points[0]["B"].as_array().unwrap().len(), 3);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"n": 1, "suite": "stokes", "seed": 9, "samples": 3}"#).unwrap();
    let out = ucgl(dir.path(), &["verify", "--config", cfg.to_str().unwrap(), "--seed", "11"]);
    assert_eq!(code(&out), 0);
    let report = json(&out);
    assert_eq!((report["n"].clone(), report["seed"].clone(), report["suite"].clone()), (1.into(), 11.into(), "stokes".into()));
    assert!(report["checks"].as_array().unwrap().iter().all(|c| c["samples"].as_u64() <= Some(3)));
}

#[test]
fn symplectic_markdown_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = ucgl(dir.path(), &["verify", "--n", "2", "--suite", "symplectic", "--samples", "10", "--tol", "1e-8", "--format", "md"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().filter(|l| l.starts_with("| symplectic.")).count() >= 8);
}
