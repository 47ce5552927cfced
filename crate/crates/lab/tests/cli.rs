use std::path::Path;
use std::process::{Command, Output};
use std::time::Instant;

const CONFIGS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs");

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_anderson-lab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn config(name: &str) -> String {
    format!("{CONFIGS}/{name}")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn smoke_pipeline_finishes_quickly() {
    let dir = tempfile::tempdir().unwrap();
    let start = Instant::now();
    let out = lab(&[
        "run",
        "--config",
        &config("smoke.json"),
        "--out",
        path(dir.path()),
        "--workers",
        "4",
    ]);
    let secs = start.elapsed().as_secs_f64();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(secs < 60.0, "smoke run took {secs:.1} s");
    for f in [
        "samples.jsonl",
        "stats.json",
        "decay.json",
        "ids.json",
        "audit.json",
        "manifest.json",
        "plots/histogram.svg",
    ] {
        assert!(dir.path().join(f).exists(), "missing {f}");
    }
    let manifest: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["workers"], 4);
    assert!(manifest["outputs"]["samples.jsonl"].is_string());
    assert!(manifest["stages"]["audit"]["seconds"].is_number());
}

#[test]
fn same_seed_gives_identical_streams() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for (dir, workers) in [(&a, "1"), (&b, "3")] {
        let out = lab(&[
            "simulate",
            "--config",
            &config("smoke.json"),
            "--out",
            path(dir.path()),
            "--workers",
            workers,
        ]);
        assert!(out.status.success());
    }
    let read = |d: &tempfile::TempDir| std::fs::read(d.path().join("samples.jsonl")).unwrap();
    assert_eq!(read(&a), read(&b));

    let c = tempfile::tempdir().unwrap();
    let out = lab(&[
        "simulate",
        "--config",
        &config("smoke.json"),
        "--out",
        path(c.path()),
        "--seed",
        "7",
    ]);
    assert!(out.status.success());
    assert_ne!(read(&a), read(&c));
}

#[test]
fn stats_and_report_read_earlier_stages() {
    let dir = tempfile::tempdir().unwrap();
    let d = path(dir.path());
    let missing = lab(&["stats", "--config", &config("smoke.json"), "--out", d]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(lab(&["simulate", "--config", &config("smoke.json"), "--out", d]).status.success());
    let out = lab(&["stats", "--config", &config("smoke.json"), "--out", d]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("stats L=50"));
    assert!(lab(&["report", "--config", &config("smoke.json"), "--out", d]).status.success());
}

#[test]
fn lambda_outside_window_exits_before_computing() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("run");
    let out = lab(&[
        "run",
        "--config",
        &config("smoke.json"),
        "--out",
        path(&target),
        "--override",
        "lambda=1.5",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("localized window"));
    assert!(!target.exists());
}

#[test]
fn empty_scale_list_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab(&[
        "verify",
        "--config",
        &config("smoke.json"),
        "--out",
        path(dir.path()),
        "--override",
        "L_list=[]",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_override_and_zero_workers_are_rejected() {
    let out = lab(&["simulate", "--config", &config("smoke.json"), "--override", "no.such.key=1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = lab(&["simulate", "--config", &config("smoke.json"), "--workers", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn decay_below_margin_exits_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab(&[
        "decay",
        "--config",
        &config("smoke.json"),
        "--out",
        path(dir.path()),
        "--override",
        "gamma_log=1.0",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("margin"));
    assert!(dir.path().join("decay.json").exists());
}

#[test]
fn free_laplacian_verify_reports_failure() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab(&[
        "verify",
        "--config",
        &config("free_laplacian.json"),
        "--out",
        path(dir.path()),
        "--override",
        "L_list=[100,200]",
        "--override",
        "audit.n_realizations=200",
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("C5 FAIL"), "{stdout}");
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("verify.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], false);
    assert!(dir.path().join("verify.txt").exists());
}
