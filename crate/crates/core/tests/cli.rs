use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stable-chsh")).args(args).output().expect("run binary")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn family_build_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("d4.json");
    let out = run(&["family", "build", "--family", "d4_reg", "--a", "0.9", "--out", path(&f)]);
    assert_eq!(out.status.code(), Some(0));
    let inst: Value = serde_json::from_str(&std::fs::read_to_string(&f).unwrap()).unwrap();
    assert_eq!(inst["dim_a"], 8);

    let report_file = dir.path().join("report.json");
    let out = run(&["verify", path(&f), "--depth", "4", "--format", "json", "--out", path(&report_file)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&out);
    assert_eq!(r["pass"], true);
    assert_eq!(r["label"], "chi_{12345^2}^{(D4)}");
    assert!((r["chsh_value"].as_f64().unwrap() - 3.6).abs() < 1e-9);
    let saved: Value = serde_json::from_str(&std::fs::read_to_string(&report_file).unwrap()).unwrap();
    assert_eq!(saved, r);
}

#[test]
fn quantum_povm_has_eight_outcomes() {
    let out = run(&["quantum", "build", "--kind", "povm"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["measurement"].as_array().unwrap().len(), 8);
}

#[test]
fn semigroup_on_k4() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("k4.json");
    assert_eq!(run(&["family", "build", "--family", "k4_reg", "--out", path(&f)]).status.code(), Some(0));
    let out = run(&["semigroup", path(&f), "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["group_order"], 4);
    assert_eq!(v["closure_size"], 4);
    assert_eq!(v["truncated"], false);
}

#[test]
fn malformed_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bad.json");
    std::fs::write(&f, r#"{"version": 1, "dim_a": 4, "rho": [[0.5, 0"#).unwrap();
    let out = run(&["verify", path(&f)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));

    assert_eq!(run(&["verify", "/nonexistent/instance.json"]).status.code(), Some(2));
    assert_eq!(run(&["family", "build", "--family", "k4_reg", "--a", "0.3"]).status.code(), Some(2));
    assert_eq!(run(&["family", "build", "--family", "nope"]).status.code(), Some(2));
    assert_eq!(run(&["classify", "--n-max", "3"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn corrupted_table_is_detected() {
    let out = run(&["classify", "--corrupt-table"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
}

#[test]
fn classify_text_output() {
    let out = run(&["classify"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("7 families, 1 duplicate(s)"));
    assert!(text.contains("chi_{12345^2}^{(D4)}"));
}
