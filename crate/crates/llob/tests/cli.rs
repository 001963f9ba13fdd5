//! End-to-end checks of the `llob` binary: exit codes, determinism, and
//! config handling.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_llob")
}

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("llob-cli-{tag}-{}", std::process::id()));
    std::fs::remove_dir_all(&dir).ok();
    dir
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("spawn llob")
}

fn read_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn successful_run_writes_tables_and_manifest() {
    let dir = tmp_dir("ok");
    let out = run(&[
        "impact-sweep",
        "--out",
        dir.to_str().unwrap(),
        "--set",
        "n_points=9",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = std::fs::read_to_string(dir.join("manifest.txt")).unwrap();
    assert!(manifest.contains("experiment=impact-sweep"));
    assert!(manifest.contains("config.n_points=9"));
    let csv = std::fs::read_to_string(dir.join("impact_sweep.csv")).unwrap();
    assert!(csv.starts_with("rate_ratio,A,y_ratio\n"));
    assert_eq!(csv.lines().count(), 10);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn reruns_are_byte_identical() {
    let a = tmp_dir("det-a");
    let b = tmp_dir("det-b");
    for dir in [&a, &b] {
        let out = run(&[
            "manipulate",
            "--out",
            dir.to_str().unwrap(),
            "--seed",
            "7",
            "--set",
            "n_trials=25",
            "--set",
            "dt=0.02",
            "--set",
            "t_total=2.0",
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(read_all(&a), read_all(&b));
    std::fs::remove_dir_all(&a).ok();
    std::fs::remove_dir_all(&b).ok();
}

#[test]
fn unknown_experiment_exits_2() {
    let out = run(&["frobnicate", "--out", tmp_dir("bad-exp").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown experiment"));
}

#[test]
fn unknown_config_key_exits_2() {
    let out = run(&["stationary", "--set", "warp_factor=9"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown key"));
}

#[test]
fn malformed_set_exits_2() {
    let out = run(&["stationary", "--set", "m0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_config_file_exits_2() {
    let dir = tmp_dir("bad-cfg");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.cfg");
    std::fs::write(&path, "dt=not-a-number\n").unwrap();
    let out = run(&["stationary", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn missing_config_file_exits_2() {
    let out = run(&["stationary", "--config", "/nonexistent/path.cfg"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn empty_config_file_runs_with_defaults() {
    let dir = tmp_dir("empty-cfg");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("empty.cfg");
    std::fs::write(&path, "").unwrap();
    let out = run(&[
        "book-shape",
        "--config",
        path.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.join("manifest.txt").exists());
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn invalid_solver_setting_exits_2() {
    let out = run(&["stationary", "--set", "dt=-1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_plus_overrides_are_echoed() {
    let dir = tmp_dir("echo");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("run.cfg");
    std::fs::write(&path, "m0 = 2.0\nt_total = 0.5\n").unwrap();
    let out = run(&[
        "stationary",
        "--config",
        path.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
        "--set",
        "dt=0.002",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = std::fs::read_to_string(dir.join("manifest.txt")).unwrap();
    assert!(manifest.contains("config.m0=2"));
    assert!(manifest.contains("config.t_total=0.5"));
    assert!(manifest.contains("config.dt=0.002"));
    std::fs::remove_dir_all(&dir).ok();
}
