use std::fs;
use std::path::Path;
use std::process::Command;

use serde_json::Value;
use vbma::cli::{main_with_args, EXIT_INPUT, EXIT_NOT_CONVERGED, EXIT_OK};
use vbma::io::{read_field_csv, read_solution, IoError};
use vbma::make_grid;

fn run(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let mut full = vec!["vbma"];
    full.extend_from_slice(args);
    let code = main_with_args(full, &mut out);
    (code, String::from_utf8(out).unwrap())
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, body).unwrap();
    path.display().to_string()
}

#[test]
fn slopes_json() {
    let (code, out) = run(&["--json", "slopes", "--r1", "3", "--r2", "2"]);
    assert_eq!(code, EXIT_OK);
    let doc: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(doc["mu_ma_sub"], "8");
    assert_eq!(doc["mu_ma_total"], "17/2");
    assert_eq!(doc["ma_stable"], true);
    assert_eq!(doc["mumford_gap"], -2);
    assert_eq!(doc["manifest"]["command"], "slopes");
}

#[test]
fn malformed_instance_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, r#"{"r": 2, "A": [[1, 0]], "B": [], "C": []}"#).unwrap();
    let (code, out) = run(&["--json", "positivity", "--input", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_INPUT);
    let doc: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(doc["error"]["kind"], "ConfigParseError");
    let (code, _) = run(&[
        "positivity",
        "--input",
        dir.path().join("missing.json").to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_INPUT);
}

#[test]
fn positivity_of_fs_instance() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fs.json");
    fs::write(
        &path,
        r#"{"r": 2, "A": [[2,0],[0,0],[0,0],[1,0]], "B": [[0,0],[1,0],[0,0],[0,0]], "C": [[1,0],[0,0],[0,0],[2,0]]}"#,
    )
    .unwrap();
    let (code, out) = run(&["--json", "positivity", "--input", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    let doc: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(doc["nakano"]["margin"], 0.0);
    assert_eq!(doc["ma"]["positive"], true);
    assert_eq!(doc["griffiths"]["positive"], true);
}

#[test]
fn solve_verify_dump_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"r1": 3, "r2": 2, "n": 32}"#);
    let sol_dir = dir.path().join("sol");
    let (code, out) = run(&[
        "--json",
        "solve",
        "--config",
        &cfg,
        "--out",
        sol_dir.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert!(sol_dir.join("report.json").exists());

    let (header, psi) = read_solution(&sol_dir).unwrap();
    assert!(header.converged);
    assert_eq!(header.t_final, 1.0);

    let (code, out) = run(&["--json", "verify", "--solution", sol_dir.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK, "{out}");
    let doc: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(doc["verification"]["passed"], true);

    let dump_dir = dir.path().join("dump");
    let (code, _) = run(&[
        "dump",
        "--solution",
        sol_dir.to_str().unwrap(),
        "--out",
        dump_dir.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    let back = read_field_csv(&dump_dir.join("psi.csv"), psi.grid()).unwrap();
    assert_eq!(back.values(), psi.values());
}

#[test]
fn unstable_ranks_exit_with_solver_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"r1": 2, "r2": 3, "n": 16}"#);
    let out_dir = dir.path().join("out");
    let (code, out) = run(&[
        "--json",
        "solve",
        "--config",
        &cfg,
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_NOT_CONVERGED);
    let doc: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(doc["error"]["kind"], "StabilityGate");
    assert!(out_dir.join("report.json").exists());
}

#[test]
fn unknown_config_fields_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"r1": 3, "r2": 2, "grid": 32}"#);
    let (code, _) = run(&[
        "solve",
        "--config",
        &cfg,
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_INPUT);
}

#[test]
fn empty_field_file_is_a_schema_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.csv");
    fs::write(&path, "").unwrap();
    let grid = make_grid(num_complex::Complex64::i(), 16).unwrap();
    assert!(matches!(
        read_field_csv(&path, &grid),
        Err(IoError::SchemaMismatch(_))
    ));
    fs::write(&path, "x,y,value\n0,0,1\n").unwrap();
    assert!(matches!(
        read_field_csv(&path, &grid),
        Err(IoError::SchemaMismatch(_))
    ));
}

#[test]
fn fs_check_reports_the_discrepancy() {
    let (code, out) = run(&["--json", "fs-check", "--n", "2"]);
    assert_eq!(code, EXIT_OK);
    let doc: Value = serde_json::from_str(&out).unwrap();
    let text = doc.to_string();
    assert!(text.contains("discrepancy"), "{text}");
}

#[test]
fn binary_exit_codes() {
    let exe = env!("CARGO_BIN_EXE_vbma");
    let status = Command::new(exe)
        .args(["slopes", "--r1", "3", "--r2", "2"])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(EXIT_OK));
    let status = Command::new(exe)
        .args(["slopes", "--r1", "x"])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(EXIT_INPUT));
}
