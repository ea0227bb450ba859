use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const COARSE: [&str; 4] = ["--mesh-h", "0.05", "--r-grid", "0.02:0.995:80"];

fn magbound(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_magbound")).args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr_record(out: &Output) -> Value {
    let line = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(line.trim()).expect("stderr is one JSON record")
}

fn write_domain(dir: &Path, name: &str, json: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, json).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn bound_on_an_ellipse_file() {
    let dir = tempfile::tempdir().unwrap();
    let domain = write_domain(dir.path(), "ellipse.json", r#"{"kind": "ellipse", "alpha": 2, "beta": 1}"#);
    let mut args = vec!["bound", "--domain", &domain, "--b", "0.4", "--radial-n", "1024"];
    args.extend(COARSE);
    let report = stdout_json(&magbound(&args));
    let c = report["C_factor"].as_f64().unwrap();
    let rho = report["rho"].as_f64().unwrap();
    assert!((c - 1.0).abs() < 0.01, "C = {c}");
    assert!((rho - 2.0 * 2f64.sqrt() / 5f64.sqrt()).abs() < 0.005, "rho = {rho}");
    assert_eq!(report["guarantee"], "GUARANTEED");
    assert!(report["units"].as_str().unwrap().contains("1/length^2"));
    assert_eq!(report["provenance"]["mesh_h"], 0.05);
}

#[test]
fn zero_field_spectrum_is_zero() {
    let report = stdout_json(&magbound(&["spectrum", "--R", "1", "--b", "0"]));
    assert_eq!(report["spectra"][0]["mu1"], 0.0);
    let csv = magbound(&["spectrum", "--R", "1", "--b", "0", "--format", "csv"]);
    assert_eq!(String::from_utf8(csv.stdout).unwrap(), "b,R,mu1,minimizing_mode\n0.0,1.0,0.0,0\n");
}

#[test]
fn reports_are_byte_identical_across_runs_and_thread_counts() {
    let mut args = vec!["compare", "--builtin", "superellipse(4,1)", "--b-range", "0.2:0.6:3", "--radial-n", "512"];
    args.extend(COARSE);
    let first = magbound(&args);
    assert!(first.status.success());
    let second = magbound(&args);
    let mut single = args.clone();
    single.extend(["--jobs", "1"]);
    let third = magbound(&single);
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(first.stdout, third.stdout);
}

#[test]
fn usage_errors_have_their_own_exit_code() {
    let out = magbound(&["bound", "--b", "0.4"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_record(&out)["error"]["kind"], "usage");

    let dir = tempfile::tempdir().unwrap();
    let bad = write_domain(dir.path(), "bad.json", r#"{"kind": "triangle"}"#);
    let out = magbound(&["bound", "--domain", &bad, "--b", "0.4"]);
    assert_eq!(out.status.code(), Some(2));

    let out = magbound(&["spectrum", "--R", "1", "--b-range", "0.5:0.1:3"]);
    assert_eq!(out.status.code(), Some(2));
    let out = magbound(&["torsion", "--builtin", "disk(1)", "--r-grid", "0:1:10"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn module_errors_name_the_module() {
    let out = magbound(&["spectrum", "--R", "1", "--b", "200", "--radial-n", "64"]);
    assert_eq!(out.status.code(), Some(1));
    let record = stderr_record(&out);
    assert_eq!(record["error"]["module"], "disk_spectrum");
    assert_eq!(record["error"]["kind"], "mode_scan");
}

#[test]
fn inadmissible_field_is_flagged_not_fatal() {
    let mut args = vec!["bound", "--builtin", "ellipse(2,1)", "--b", "0.6", "--radial-n", "512"];
    args.extend(COARSE);
    let report = stdout_json(&magbound(&args));
    assert_eq!(report["admissible"], false);
    assert_eq!(report["guarantee"], "NOT-GUARANTEED");
}

#[test]
fn torsion_writes_plot_data() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    let mut args = vec!["torsion", "--builtin", "disk(1)", "--out", out_dir.to_str().unwrap()];
    args.extend(COARSE);
    let report = stdout_json(&magbound(&args));
    assert!((report["F"].as_f64().unwrap() - 4.0 * std::f64::consts::PI).abs() < 0.05);
    let profile = fs::read_to_string(out_dir.join("level_profile.csv")).unwrap();
    assert_eq!(profile.lines().count(), 81);
    assert!(fs::read_to_string(out_dir.join("torsion_field.csv")).unwrap().starts_with("x,y,v\n"));
    let saved: Value = serde_json::from_str(&fs::read_to_string(out_dir.join("torsion.json")).unwrap()).unwrap();
    assert_eq!(saved, report);
}

#[test]
fn family_sweep_merges_points_in_order() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("sweep");
    let mut args = vec![
        "sweep", "--family", "ellipse:1:1.5:3", "--b", "0.5", "--radial-n", "512", "--format", "csv", "--out",
        out_dir.to_str().unwrap(),
    ];
    args.extend(COARSE);
    let out = magbound(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 3);
    let params: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(params, vec![1.0, 1.25, 1.5]);
    // every member has area pi
    assert!(rows.iter().all(|r| (r[2].parse::<f64>().unwrap() - std::f64::consts::PI).abs() < 1e-9));
    assert_eq!(fs::read_dir(out_dir.join("points")).unwrap().count(), 3);
    assert!(out_dir.join("sweep.json").exists());
}

#[test]
fn coarse_validation_prints_a_line_per_check() {
    let mut args = vec!["validate", "--skip-direct", "--radial-n", "512"];
    args.extend(COARSE);
    let out = magbound(&args);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(text.lines().filter(|l| l.starts_with("PASS ")).count() > 40);
    assert!(text.lines().last().unwrap().ends_with("0 failed"));
}
