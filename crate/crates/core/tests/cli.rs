//! End-to-end runs of the `blocksep` binary.

use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn run(args: &[&str]) -> (i32, Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_blocksep"))
        .args(args)
        .output()
        .unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    let json = serde_json::from_str(&stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap(), json)
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

// {I, 2I; 2I, I} in the layout above: blocks is n x n of d x d matrices.
const INDEFINITE: &str = r#"{"n":2,"d":2,"blocks":[
  [[[[1,0],[0,0]],[[0,0],[1,0]]], [[[2,0],[0,0]],[[0,0],[2,0]]]],
  [[[[2,0],[0,0]],[[0,0],[2,0]]], [[[1,0],[0,0]],[[0,0],[1,0]]]]]}"#;

const NON_COMMUTING: &str = r#"{"n":2,"d":2,"blocks":[
  [[[[1,0],[0,0]],[[0,0],[1,0]]], [[[0,0],[1,0]],[[1,0],[0,0]]]],
  [[[[0,0],[1,0]],[[1,0],[0,0]]], [[[1,0],[0,0]],[[0,0],[-1,0]]]]]}"#;

fn identity_json() -> String {
    blocksep::BlockMatrix::from_dense(&blocksep::ComplexMatrix::identity(4), 2, 2)
        .unwrap()
        .to_json(None)
        .to_string()
}

#[test]
fn identity_is_separable() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "id.json", &identity_json());
    let (code, report) = run(&["check", s(&m)]);
    assert_eq!(code, 0);
    assert_eq!(report["verdict"], "separable");

    let dec = dir.path().join("dec.json");
    let (code, _) = run(&["decompose", s(&m), "-o", s(&dec)]);
    assert_eq!(code, 0);
    let dec_json: Value = serde_json::from_str(&std::fs::read_to_string(&dec).unwrap()).unwrap();
    assert_eq!(dec_json["terms"].as_array().unwrap().len(), 4);
    assert_eq!(run(&["verify", s(&m), s(&dec)]).0, 0);
}

#[test]
fn indefinite_matrix_yields_witness() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "neg.json", INDEFINITE);
    let (code, report) = run(&["check", s(&m)]);
    assert_eq!(code, 2);
    assert_eq!(report["verdict"], "not_psd");
    let value = report["witness"]["value"].as_f64().unwrap();
    assert!((value + 1.0).abs() < 1e-12);

    let w = write(dir.path(), "w.json", &report["witness"].to_string());
    let (code, verdict) = run(&["verify", s(&m), s(&w)]);
    assert_eq!(code, 0);
    assert_eq!(verdict["passed"], true);
}

#[test]
fn non_commuting_blocks_fail_hypotheses() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "nc.json", NON_COMMUTING);
    let (code, report) = run(&["check", s(&m)]);
    assert_eq!(code, 3);
    assert_eq!(report["verdict"], "hypotheses_fail");
}

#[test]
fn malformed_input_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "bad.json", r#"{"n":2,"blocks":[]}"#);
    let out = Command::new(env!("CARGO_BIN_EXE_blocksep"))
        .args(["check", s(&m)])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`d`"));
    assert_eq!(run(&["check", "/nonexistent/matrix.json"]).0, 1);
}
