//! End-to-end tests of the `cutters` binary against the shipped problem and
//! config files.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_cutters")
}

fn repo_path(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn run_cli(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("binary runs")
}

#[test]
fn solve_writes_trace_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let summary = dir.path().join("summary.json");
    let out = run_cli(&[
        "solve",
        "--problem",
        repo_path("problems/two_hyperplanes.json").to_str().unwrap(),
        "--config",
        repo_path("configs/max_extrapolation.json").to_str().unwrap(),
        "--out",
        trace.to_str().unwrap(),
        "--summary",
        summary.to_str().unwrap(),
        "--start",
        "1,1",
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(trace.exists() && summary.exists());

    let text = std::fs::read_to_string(&summary).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(parsed["status"], "converged");
    assert!(parsed["final_residual"].as_f64().unwrap() <= 1e-8);

    // the trace audits clean
    let verify = run_cli(&["verify", "--trace", trace.to_str().unwrap()]);
    assert!(
        verify.status.success(),
        "stdout: {}",
        String::from_utf8_lossy(&verify.stdout)
    );
}

#[test]
fn solve_mixed_problem_with_classical_config() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.csv");
    let out = run_cli(&[
        "solve",
        "--problem",
        repo_path("problems/mixed_r3.json").to_str().unwrap(),
        "--config",
        repo_path("configs/classical_fixed1.json").to_str().unwrap(),
        "--out",
        trace.to_str().unwrap(),
        "--start",
        "4,-3,2",
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("converged"), "{stdout}");
    // default summary path sits next to the trace
    assert!(dir.path().join("t.csv.summary.json").exists());
}

#[test]
fn missing_problem_file_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_cli(&[
        "solve",
        "--problem",
        dir.path().join("nope.json").to_str().unwrap(),
        "--config",
        repo_path("configs/max_extrapolation.json").to_str().unwrap(),
        "--out",
        dir.path().join("t.csv").to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn verify_problem_mode_passes_on_shipped_files() {
    let out = run_cli(&[
        "verify",
        "--problem",
        repo_path("problems/mixed_r3.json").to_str().unwrap(),
        "--config",
        repo_path("configs/example46_max.json").to_str().unwrap(),
    ]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}");
    assert!(stdout.contains("PASS Fejer audit"), "{stdout}");
}

#[test]
fn verify_quick_battery_passes() {
    let out = run_cli(&["verify", "--quick", "--seed", "7"]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}");
    assert_eq!(stdout.matches("PASS").count(), 8, "{stdout}");
}

#[test]
fn bench_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("bench.csv");
    let md = dir.path().join("bench.md");
    let out = run_cli(&[
        "bench",
        "--seed",
        "11",
        "--runs",
        "3",
        "--n",
        "4",
        "--m",
        "4",
        "--geometry",
        "halfspaces",
        "--policies",
        "fixed:1,max",
        "--schedules",
        "constant-uniform,cyclic-singleton",
        "--out",
        csv.to_str().unwrap(),
        "--markdown",
        md.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let table = std::fs::read_to_string(&csv).unwrap();
    // header + 3 seeds x 2 policies x 2 schedules
    assert_eq!(table.lines().count(), 1 + 12);
    assert!(table.starts_with("policy,schedule,seed,n,m,status,iterations,final_residual"));
    let md_text = std::fs::read_to_string(&md).unwrap();
    assert!(md_text.contains("| constant-uniform |"));
}

#[test]
fn bench_requires_seed() {
    let out = run_cli(&["bench", "--out", "/tmp/x.csv"]);
    assert!(!out.status.success());
}

/// shipped problem files survive a load/emit/load round trip unchanged
#[test]
fn shipped_problems_round_trip() {
    for name in ["problems/two_hyperplanes.json", "problems/mixed_r3.json"] {
        let path = repo_path(name);
        let loaded = cutters::io::load_problem(&path).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let copy = dir.path().join("copy.json");
        cutters::io::save_problem(&copy, &loaded.spec).unwrap();
        let again = cutters::io::load_problem(&copy).unwrap();
        assert_eq!(again.spec, loaded.spec, "{name}");
    }
}
