use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn fracperiodic(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracperiodic"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn unknown_preset_writes_error_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = fracperiodic(&["solve", "--preset", "no-such-thing"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let err = read_json(&dir.path().join("error.json"));
    assert_eq!(err["error"], "unknown_preset");
    assert_eq!(err["command"], "solve");
}

#[test]
fn order_below_one_half_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[lienard]\ns = 0.4\nw = { modes = [{ n = 1, b = 0.3 }] }\n");
    let out = fracperiodic(&["solve", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let err = read_json(&dir.path().join("error.json"));
    assert_eq!(err["error"], "validation_error");
    let v = &err["details"]["violations"][0];
    assert_eq!(v["line"], 2);
    assert_eq!(v["path"], "lienard.s");
}

#[test]
fn negative_tolerance_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[numerics]\nresidual_tol = -1e-10\n");
    let out = fracperiodic(&["verify", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let err = read_json(&dir.path().join("error.json"));
    assert_eq!(err["details"]["violations"][0]["path"], "numerics.residual_tol");
}

#[test]
fn preset_and_config_together_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let out = fracperiodic(&["verify", "--config", &cfg, "--preset", "forbat"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(fracperiodic(&["verify", "--config", &cfg, "--preset", "custom"], dir.path()).status.success());
}

#[test]
fn kernel_at_pi_for_one_half() {
    let dir = tempfile::tempdir().unwrap();
    let out = fracperiodic(&["kernel", "--s", "0.5", "--z", "3.14159265"], dir.path());
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.path().join("kernel.csv")).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    let k: f64 = row[2].parse().unwrap();
    // z is π to 9 digits; K has a stationary point there
    assert!((k - 0.25).abs() < 1e-10, "{k}");
    assert!(String::from_utf8_lossy(&out.stdout).contains("K(z = 3.14159265"));
}

#[test]
fn verify_defaults_all_pass_and_echo_config() {
    let dir = tempfile::tempdir().unwrap();
    assert!(fracperiodic(&["verify"], dir.path()).status.success());
    let v = read_json(&dir.path().join("verify.json"));
    assert_eq!(v["all_passed"], true);
    let entries = v["entries"].as_array().unwrap();
    assert!(entries.iter().all(|e| e["pass"] == true));
    assert_eq!(v["config"]["resolved"]["numerics"]["seed"], 42);
}

#[test]
fn seed_changes_verify_samples_but_reruns_are_identical() {
    let (a, b, c) =
        (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    fracperiodic(&["verify", "--seed", "7"], a.path());
    fracperiodic(&["verify", "--seed", "7", "--jobs", "2"], b.path());
    fracperiodic(&["verify", "--seed", "8"], c.path());
    let read = |d: &Path| std::fs::read(d.join("verify.json")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
    assert_ne!(read(a.path()), read(c.path()));
}

#[test]
fn solve_writes_table_report_and_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let out = fracperiodic(&["solve", "--preset", "repulsive-quadratic"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("solution.csv")).unwrap();
    assert!(csv.starts_with("t,u\n"));
    assert_eq!(csv.lines().count(), 257);
    assert!(!csv.contains('\r'));
    let rep = read_json(&dir.path().join("report.json"));
    assert_eq!(rep["kind"], "repulsive");
    assert_eq!(rep["config"]["source"], "preset:repulsive-quadratic");
    assert!(dir.path().join("bounds.json").exists());
}

#[test]
fn solve_needs_exactly_one_problem() {
    let dir = tempfile::tempdir().unwrap();
    let out = fracperiodic(&["solve"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(read_json(&dir.path().join("error.json"))["error"], "validation_error");
}

#[test]
fn trace_with_solutions() {
    let dir = tempfile::tempdir().unwrap();
    let out = fracperiodic(&["trace", "--preset", "bifurcation", "--solutions"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("branch.csv")).unwrap();
    assert!(csv.starts_with("arclength,mu,sup_norm,l2_norm,fold_flag,mean_identity_residual\n"));
    let points = read_json(&dir.path().join("branch_points.json"));
    assert_eq!(points.as_array().unwrap().len(), csv.lines().count() - 1);
}
