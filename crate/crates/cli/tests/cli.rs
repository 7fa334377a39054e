//! The `sasaki` binary end to end.

use std::path::Path;
use std::process::Command;

use proptest::prelude::*;
use sasaki_cli::{run, CommandKind, JobSpec};
use serde_json::Value;

fn sasaki(args: &[&str]) -> (i32, Value, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_sasaki")).args(args).output().unwrap();
    let stdout = String::from_utf8(out.stdout).unwrap();
    let report = serde_json::from_str(&stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap(), report, String::from_utf8(out.stderr).unwrap())
}

fn assert_schema(report: &Value) {
    let keys: Vec<&str> = report.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(keys.len(), 5, "{keys:?}");
    for k in ["command", "inputs", "residuals", "verdict", "runtime_ms"] {
        assert!(keys.contains(&k), "missing {k}");
    }
    for (name, value) in report["residuals"].as_object().unwrap() {
        assert!(value.as_f64().is_some_and(f64::is_finite), "{name} = {value}");
    }
}

fn without_runtime(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("runtime_ms");
    v
}

#[test]
fn verify_nil_exits_zero() {
    let (code, report, _) = sasaki(&["verify", "--p0", "1/sqrt(2)"]);
    assert_eq!(code, 0);
    assert_schema(&report);
    assert_eq!(report["command"], "verify");
    assert_eq!(report["verdict"]["status"], "pass");
    let r = report["residuals"]["scalar_curvature.mean"].as_f64().unwrap();
    assert!((r + 2.0).abs() < 1e-8);
}

#[test]
fn negative_w_flag_parses() {
    let (code, report, _) = sasaki(&["family", "--W", "-2"]);
    assert_eq!(code, 0);
    assert_schema(&report);
    assert_eq!(report["verdict"]["conclusion"], "SL2R~ geometry");
    assert!((report["residuals"]["eta_einstein.a"].as_f64().unwrap() + 6.0).abs() < 1e-6);
}

#[test]
fn non_flat_and_non_isometric_exit_one() {
    let (code, report, _) = sasaki(&["conformal", "--p0", "1/sqrt(2)"]);
    assert_eq!(code, 1);
    assert_eq!(report["verdict"]["status"], "fail");
    assert_eq!(report["verdict"]["checks"]["flat"], false);
    let (code, report, _) = sasaki(&["isometry", "--p0", "1/sqrt(2)", "--map-u", "2*u", "--map-v", "2*v"]);
    assert_eq!(code, 1);
    assert_schema(&report);
}

#[test]
fn malformed_input_exits_two() {
    let (code, report, stderr) = sasaki(&["verify", "--p0", "1 + * u"]);
    assert_eq!(code, 2);
    assert_eq!(report["verdict"]["status"], "error");
    assert!(stderr.contains("offset"), "{stderr}");
    let (code, _, _) = sasaki(&["solve", "--grid", "65"]);
    assert_eq!(code, 2);
    let (code, _, _) = sasaki(&["verify", "--p0", "u", "--job", "/nonexistent/job.json"]);
    assert_ne!(code, 0);
}

#[test]
fn flags_take_precedence_over_the_job_file() {
    let dir = tempfile::tempdir().unwrap();
    let job = dir.path().join("job.json");
    std::fs::write(&job, r#"{"command": "family", "W": 1.0, "samples": 20}"#).unwrap();
    let path = job.to_str().unwrap();

    let (code, from_file, _) = sasaki(&["--job", path]);
    assert_eq!(code, 0);
    assert_eq!(from_file["residuals"]["W"], 1.0);
    assert_eq!(from_file["residuals"]["samples"], 20.0);

    let (code, overridden, _) = sasaki(&["--job", path, "--W", "2"]);
    assert_eq!(code, 0);
    assert_eq!(overridden["residuals"]["W"], 2.0);
    assert_eq!(overridden["residuals"]["samples"], 20.0);
}

#[test]
fn report_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let (_, stdout, _) = sasaki(&["family", "--W", "0.5", "--report", path.to_str().unwrap()]);
    let saved: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(saved, stdout);
}

fn read_csv_rows(path: &Path) -> usize {
    std::fs::read_to_string(path).unwrap().lines().count()
}

#[test]
fn solve_build_and_plot_write_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("p0.csv");
    let (code, report, _) = sasaki(&[
        "solve", "--R", "-2 + u*v", "--grid", "17", "--boundary", "0", "--output", grid.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{report}");
    assert_eq!(read_csv_rows(&grid), 17 * 17 + 1);

    let out = dir.path().join("built");
    let (code, _, _) = sasaki(&["build", "--p0", "1 + u^2/4", "--grid", "9", "--output", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    for name in ["p0", "g_ru", "g_uu", "g_vv"] {
        assert_eq!(read_csv_rows(&out.join(format!("{name}.csv"))), 82);
    }

    let ppm = dir.path().join("p0.ppm");
    let (code, _, _) = sasaki(&["plot", "--input", grid.to_str().unwrap(), "--output", ppm.to_str().unwrap()]);
    assert_eq!(code, 0);
    let bytes = std::fs::read(&ppm).unwrap();
    assert!(bytes.starts_with(b"P6\n17 17\n255\n"));

    let table = dir.path().join("r.dat");
    let (code, _, _) = sasaki(&[
        "plot", "--field", "sin(u)*v", "--grid", "5", "--format", "table", "--output", table.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(&table).unwrap();
    assert!(text.starts_with("# u v value\n"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn identical_jobs_give_identical_reports(w in -3.0f64..3.0, seed in 0u64..100) {
        let job = JobSpec { command: Some(CommandKind::Family), w: Some(w), seed: Some(seed), samples: Some(20), ..Default::default() };
        let a: Value = serde_json::from_str(&run(&job).report.to_json()).unwrap();
        let b: Value = serde_json::from_str(&run(&job).report.to_json()).unwrap();
        assert_schema(&a);
        prop_assert_eq!(without_runtime(a), without_runtime(b));
    }
}
