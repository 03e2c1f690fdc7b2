//! Command-line contract: exit codes, output layout and reproducibility.

use std::path::Path;
use std::process::{Command, Output};

fn mixing(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mixing")).args(args).env_remove("MIXING_OUT").output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn summary(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).expect("summary")).expect("json")
}

fn s(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

#[test]
fn passing_run_exits_zero_and_writes_summary_last() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("p");
    let o = mixing(&["poincare", "--samples", "50", "--dirichlet-samples", "10", "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.lines().any(|l| l.starts_with("PASS")));
    assert!(stdout.contains("poincare: PASS"));
    assert!(out.join("timing.json").exists());
    assert!(!out.join("incomplete.json").exists());
    let sum = summary(&out);
    assert_eq!(sum["status"], "pass");
    assert_eq!(sum["config"]["samples"], 50);
    for a in sum["artifacts"].as_array().unwrap() {
        assert!(out.join(a.as_str().unwrap()).exists());
    }
}

#[test]
fn config_errors_exit_two_and_list_every_problem() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("bad");
    let o = mixing(&["spectrum", "--N", "0", "--out", s(&out)]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("2 problem(s)"), "{err}");
    assert!(err.contains("N must be") && err.contains("final time"), "{err}");
    assert!(!out.exists());

    let cfg = tmp.path().join("c.json");
    std::fs::write(&cfg, r#"{"command": "spectrum", "T": 0.01, "bogus": 1}"#).unwrap();
    let o = mixing(&["spectrum", "--config", s(&cfg)]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown field `bogus`"));
}

#[test]
fn module_errors_exit_one_and_leave_an_incomplete_marker() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("e");
    // cutoff 10 does not fit the band of a 16-point grid.
    let o = mixing(&["euler", "--grid", "16", "--alpha", "0.5", "--kappa", "1", "--T", "0.01", "--out", s(&out)]);
    assert_eq!(code(&o), 1);
    assert!(out.join("incomplete.json").exists());
    assert!(!out.join("summary.json").exists());
}

#[test]
fn empty_gate_exits_three() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("edge.json");
    std::fs::write(&cfg, r#"{"N": 8, "T": 0.001, "initial": {"kind": "delta", "k": [8, 0], "mass": 1}}"#).unwrap();
    let out = tmp.path().join("edge");
    let o = mixing(&["spectrum", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stdout));
    assert_eq!(summary(&out)["status"], "inconclusive");
}

#[test]
fn flags_override_the_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.json");
    std::fs::write(&cfg, r#"{"samples": 500, "dirichlet_samples": 0, "base_seed": 3}"#).unwrap();
    let out = tmp.path().join("o");
    let o = mixing(&["poincare", "--config", s(&cfg), "--samples", "20", "--out", s(&out)]);
    assert_eq!(code(&o), 0);
    let sum = summary(&out);
    assert_eq!(sum["config"]["samples"], 20);
    assert_eq!(sum["config"]["base_seed"], 3);
}

#[test]
fn output_root_comes_from_the_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_mixing"))
        .args(["orbits", "--N", "12"])
        .env("MIXING_OUT", tmp.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(tmp.path().join("orbits").join("summary.json").exists());
}

#[test]
fn reruns_are_byte_identical_and_seeds_matter() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |name: &str, seed: &str| {
        let out = tmp.path().join(name);
        let o = mixing(&[
            "transport-mc", "--N", "6", "--dt", "1e-5", "--T", "1e-3", "--paths", "16", "--noise-samples", "1000",
            "--base-seed", seed, "--out", s(&out),
        ]);
        assert!(matches!(code(&o), 0 | 1), "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read(out.join("modes.csv")).unwrap()
    };
    let a = run("a", "7");
    assert_eq!(a, run("b", "7"));
    assert_ne!(a, run("c", "8"));
}

#[test]
fn report_consolidates_and_refuses_mixed_configs() {
    let tmp = tempfile::tempdir().unwrap();
    let p = tmp.path().join("p");
    let o1 = tmp.path().join("o1");
    let o2 = tmp.path().join("o2");
    assert_eq!(code(&mixing(&["poincare", "--samples", "20", "--dirichlet-samples", "5", "--out", s(&p)])), 0);
    assert_eq!(code(&mixing(&["orbits", "--N", "12", "--out", s(&o1)])), 0);
    assert_eq!(code(&mixing(&["orbits", "--N", "14", "--out", s(&o2)])), 0);

    let r = tmp.path().join("r");
    let o = mixing(&["report", s(&p), s(&o1), "--out", s(&r)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("poincare / discrete Poincare inequality hand cases"));
    assert!(stdout.contains("orbits / certified interior covered exactly twice"));

    let o = mixing(&["report", s(&o1), s(&o2), "--out", s(&tmp.path().join("r2"))]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("mismatched configs"));
}
