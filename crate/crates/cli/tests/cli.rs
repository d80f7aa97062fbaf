use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bqhl(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bqhl")).args(args).arg("--out").arg(dir).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn zero_dataset(dir: &Path) {
    assert_eq!(code(&bqhl(dir, &["oracle", "--amplitude", "0"])), 0);
    let o = bqhl(dir, &["direct"]);
    assert_eq!(code(&o), 2, "zero data are not generic: {}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn help_and_parse_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&bqhl(dir.path(), &["--help"])), 0);
    assert_eq!(code(&bqhl(dir.path(), &["frobnicate"])), 4);
    assert_eq!(code(&bqhl(dir.path(), &["oracle", "--grid", "3"])), 4);
    assert_eq!(code(&bqhl(dir.path(), &["oracle", "--T", "-1"])), 4);
}

#[test]
fn default_oracle_writes_decaying_profiles() {
    let dir = tempfile::tempdir().unwrap();
    let o = bqhl(dir.path(), &["oracle", "--snapshots", "3"]);
    assert_eq!(code(&o), 0);
    bqhl::io::read_initial(&dir.path().join(bqhl::io::INITIAL_FILE), true).expect("decay check holds");
    bqhl::io::read_cauchy_data(dir.path()).unwrap();
    let summary: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("oracle.json")).unwrap()).unwrap();
    assert!(summary["mass_drift"].as_f64().unwrap() < 1e-8);
    assert_eq!(summary["snapshots"].as_array().unwrap().len(), 3);
}

#[test]
fn missing_profiles_are_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&bqhl(dir.path(), &["direct", "--profiles", "/nonexistent/profiles"])), 4);
    assert_eq!(code(&bqhl(dir.path(), &["inverse", "--dataset", "/nonexistent/dataset.json"])), 4);
}

#[test]
fn config_file_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"T": 1.0, "nodes_per_ray": 8}"#).unwrap();
    assert_eq!(code(&bqhl(dir.path(), &["oracle", "--config", cfg.to_str().unwrap()])), 4);
    std::fs::write(&cfg, r#"{"amplitude": 0.0, "snapshots": 1}"#).unwrap();
    assert_eq!(code(&bqhl(dir.path(), &["oracle", "--config", cfg.to_str().unwrap()])), 0);
    assert!(dir.path().join("field_0400.csv").exists());
}

#[test]
fn zero_data_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    zero_dataset(dir.path());
    assert!(dir.path().join("dataset.json").exists(), "dataset is written before the exit");

    let o = bqhl(dir.path(), &["verify"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("vacuous"));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("verify.json")).unwrap()).unwrap();
    assert_eq!(report["generic"], Value::Bool(false));

    assert_eq!(code(&bqhl(dir.path(), &["inverse", "--grid", "3,2"])), 0);
    let rows = bqhl::io::read_fields(&dir.path().join("fields.csv")).unwrap();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r.u.abs() <= 1e-12 && r.v.abs() <= 1e-12));
}

#[test]
fn corrupted_dataset_is_a_schema_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dataset.json");
    std::fs::write(&path, "{\"schema\": \"bqhl/1\", \"rays\": [").unwrap();
    assert_eq!(code(&bqhl(dir.path(), &["verify"])), 4);
    std::fs::write(&path, r#"{"schema": "other/9", "rays": [], "T": 1.0, "k_max": 1.0, "assumptions": null}"#).unwrap();
    assert_eq!(code(&bqhl(dir.path(), &["inverse"])), 4);
}

#[test]
fn condition_gate_rejects_with_a_stamp() {
    let dir = tempfile::tempdir().unwrap();
    zero_dataset(dir.path());
    let path = dir.path().join("dataset.json");
    let mut doc: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    for ray in doc["rays"].as_array_mut().unwrap() {
        for s in ray["samples"].as_array_mut().unwrap() {
            let rho = s[0].as_f64().unwrap().hypot(s[1].as_f64().unwrap());
            // Vanishes at the origin like the stored zero origin fits.
            s[2] = (0.2 * rho * rho * (-rho).exp()).into();
        }
    }
    doc["assumptions"]["pass"] = Value::Bool(true);
    std::fs::write(&path, serde_json::to_string(&doc).unwrap()).unwrap();

    let o = bqhl(dir.path(), &["inverse", "--grid", "1,1", "--cond-limit", "1"]);
    assert_eq!(code(&o), 3);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("(x, t) = (15, 0.5)") && err.contains("condition estimate"), "{err}");
}

#[test]
fn oracle_blow_up_is_a_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let o = bqhl(dir.path(), &["oracle", "--amplitude", "3", "--width", "2", "--dt", "0.2", "--T", "4"]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("blow-up"));
}
