use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn freegva(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_freegva")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8")
}

fn with_suite(json: &str, extra: &[&str]) -> Output {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("suite.json");
    fs::write(&path, json).unwrap();
    let mut args = vec!["verify", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    freegva(&args)
}

const SMALL: &str = r#"{
  "format": "json",
  "checks": [
    {"check": "fib-recursions", "grid": {"p": [2, 3], "l": ["0..4"]}},
    {"check": "fibonacci", "degree": 10, "grid": {"p": [2], "k": [4, 5], "m": [0]}},
    {"check": "enumeration", "family": "free-module", "qCutoff": 10, "grid": {"g": ["1/2", 2], "m": [0]}}
  ]
}"#;

#[test]
fn rewrite_examples() {
    let o = freegva(&["rewrite", "b(-2) b(-2)", "--g", "2", "--m", "0"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "-2 * b(-3)b(-1)v_0\n");
    assert_eq!(stdout(&freegva(&["rewrite", "b(-1) b(-1)", "--g", "2"])), "0\n");
    assert_eq!(stdout(&freegva(&["rewrite", "b(-3) b(-1)", "--g", "2"])), "1 * b(-3)b(-1)v_0\n");
    let outer = freegva(&["rewrite", "b(-2) b(-2)", "--g", "2", "--outermost"]);
    assert_eq!(stdout(&outer), "-2 * b(-3)b(-1)v_0\n");
    assert_eq!(freegva(&["rewrite", "b(-2) b(-1/2)", "--g", "2"]).status.code(), Some(2));
    assert_eq!(freegva(&["rewrite", "b(-2", "--g", "2"]).status.code(), Some(2));
}

#[test]
fn basis_listings() {
    let o = freegva(&["basis", "--family", "finite-algebra", "--p", "2", "--k", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let rows: Vec<String> = stdout(&o).lines().filter(|l| !l.starts_with('#')).map(String::from).collect();
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[4], "b(-3)b(-1)1\t2\t4");
    let o = freegva(&["basis", "--family", "free-module", "--g", "2", "--qcut", "9", "--charge-max", "0"]);
    assert_eq!(stdout(&o).lines().filter(|l| !l.starts_with('#')).count(), 1);
    let o = freegva(&["basis", "--family", "free-module", "--g", "1/2", "--m", "0", "--qcut", "3", "--json"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["basis"]["modes"].as_array().unwrap().len(), 5);
    assert_eq!(freegva(&["basis", "--family", "free-module", "--g", "2"]).status.code(), Some(2));
    assert_eq!(freegva(&["basis", "--family", "finite-module", "--p", "x"]).status.code(), Some(2));
}

#[test]
fn char_side_by_side() {
    let o = freegva(&["char", "--family", "finite-algebra", "--p", "2", "--k", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("basis:  1 + z*(q + q^2 + q^3) + z^2*q^4\n"), "{out}");
    assert!(out.ends_with("PASS\n"));
    let o = freegva(&["char", "--family", "finite-module", "--p", "2", "--k", "1", "--m", "3"]);
    assert!(stdout(&o).contains("closed: 1\n"));
}

#[test]
fn small_suite_passes_and_is_deterministic() {
    let a = with_suite(SMALL, &[]);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    let v: Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(v["summary"]["total"], 14);
    assert_eq!(v["summary"]["fail"], 0);
    let b = with_suite(SMALL, &[]);
    assert_eq!(a.stdout, b.stdout);
    let csv = stdout(&with_suite(SMALL, &["--format", "csv"]));
    assert!(csv.starts_with("check,params,verdict,windowLimited,detail\n"));
    assert_eq!(csv.lines().count(), 15);
    let md = stdout(&with_suite(SMALL, &["--format", "markdown"]));
    assert!(md.contains("14 checks: 14 PASS, 0 FAIL, 0 N/A"));
}

#[test]
fn perturbed_suite_fails_with_location() {
    let json = SMALL.replacen(
        "\"checks\"",
        "\"perturb\": {\"check\": \"fib-recursions\", \"index\": 3, \"z\": 1, \"q\": 3, \"delta\": \"1/2\"},\n  \"checks\"",
        1,
    );
    let o = with_suite(&json, &[]);
    assert_eq!(o.status.code(), Some(1));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["summary"]["fail"], 1);
    let bad: Vec<&Value> = v["results"].as_array().unwrap().iter().filter(|r| r["verdict"] == "FAIL").collect();
    assert_eq!(bad[0]["params"], "p=3 l=1 (perturbed)");
    assert!(bad[0]["detail"].as_str().unwrap().contains("z^1 q^3"), "{}", bad[0]);
}

#[test]
fn configuration_errors_exit_2() {
    let empty = r#"{"checks": [{"check": "switching", "grid": {"p": [], "k": [0], "m": [0]}}]}"#;
    assert_eq!(with_suite(empty, &[]).status.code(), Some(2));
    assert_eq!(with_suite(r#"{"checks": []}"#, &[]).status.code(), Some(2));
    let missing = r#"{"checks": [{"check": "switching", "grid": {"p": [2]}}]}"#;
    assert_eq!(with_suite(missing, &[]).status.code(), Some(2));
    let unknown = r#"{"checks": [{"check": "nothing", "grid": {"p": [2]}}]}"#;
    assert_eq!(with_suite(unknown, &[]).status.code(), Some(2));
    let cut = r#"{"qCutoff": 0, "checks": [{"check": "lattice", "grid": {"p": [2], "l": [0]}}]}"#;
    assert_eq!(with_suite(cut, &[]).status.code(), Some(2));
    let bad_perturb = r#"{"perturb": {"check": "flag", "z": 0, "q": 0},
        "checks": [{"check": "flag", "grid": {"p": [2], "n": [1]}}]}"#;
    assert_eq!(with_suite(bad_perturb, &[]).status.code(), Some(2));
    assert_eq!(freegva(&["verify", "/nonexistent/suite.json"]).status.code(), Some(2));
    assert_eq!(freegva(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn report_lists_pieces() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("suite.json");
    fs::write(&path, r#"{"checks": [{"check": "fibonacci", "grid": {"p": [2], "k": [4], "m": [0]}}]}"#).unwrap();
    let o = freegva(&["report", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let pieces = v[0]["pieces"].as_array().unwrap();
    assert!(!pieces.is_empty());
    assert!(pieces.iter().all(|p| p["verdict"] == "PASS" && p["rank_in"].is_u64()));
    assert_eq!(v[0]["certification"], "matrix rank");
}

#[test]
fn default_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("card.md");
    let o = freegva(&["verify", "--output", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let card = fs::read_to_string(&out).unwrap();
    assert!(card.contains(" 0 FAIL"));
}
