use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn plan(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/plans").join(rel)
}

fn craft(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_craft")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

#[test]
fn validate_accepts_golden_plan() {
    let out = craft(&["validate", plan("valid/table_1.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["ok"], true);
}

#[test]
fn validate_reports_missing_field() {
    let out = craft(&["validate", plan("invalid/chair_missing_align_y.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let report = json(&out);
    assert_eq!(report["ok"], false);
    let errors = report["errors"].as_array().unwrap();
    assert!(errors.iter().any(|e| e["code"] == "MissingField" && e["field"].as_str().unwrap().contains("ALIGN")));
}

#[test]
fn simulate_support_on_table() {
    let out = craft(&["simulate", plan("valid/table_1.json").to_str().unwrap(), "--function", "support"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let outcome = json(&out);
    assert_eq!(outcome["success"], true);
}

#[test]
fn build_prints_assembly() {
    let out = craft(&["build", plan("valid/hammer_1.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(json(&out)["parts"].as_array().is_some_and(|p| !p.is_empty()));
}

#[test]
fn usage_error_exits_2() {
    assert_eq!(craft(&["simulate"]).status.code(), Some(2));
    assert_eq!(craft(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn missing_file_exits_2() {
    assert_eq!(craft(&["validate", "/nonexistent/plan.json"]).status.code(), Some(2));
}
