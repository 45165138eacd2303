use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;
use tempfile::TempDir;

fn shadow(args: &[&str]) -> (i32, Value, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_shadow"))
        .args(args)
        .output()
        .expect("run shadow");
    let stdout = String::from_utf8_lossy(&out.stdout);
    let json = serde_json::from_str(&stdout).unwrap_or(Value::Null);
    (
        out.status.code().unwrap_or(-1),
        json,
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_then_solve_cube() {
    let dir = TempDir::new().unwrap();
    let cube = dir.path().join("cube.json");
    let (code, meta, _) = shadow(&["gen", "--kind", "cube", "--n", "3", "-o", s(&cube)]);
    assert_eq!(code, 0);
    assert_eq!(meta["vertices"], 8);
    assert_eq!(meta["tau_sq"], "1/3");

    let trace = dir.path().join("trace.jsonl");
    let (code, out, _) = shadow(&["solve", s(&cube), "--objective", "1,2,-3", "--trace", s(&trace)]);
    assert_eq!(code, 0);
    assert_eq!(out["status"], "optimal");
    assert_eq!(out["value"], "3");
    assert_eq!(out["vertex"], serde_json::json!(["1", "1", "0"]));
    let lines = std::fs::read_to_string(&trace).unwrap();
    for l in lines.lines() {
        let v: Value = serde_json::from_str(l).unwrap();
        assert!(v.get("lambda").is_some() && v.get("enter").is_some());
    }
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let empty = write(&dir, "empty.json", r#"{"A": [[1], [-1]], "b": [-1, -1]}"#);
    assert_eq!(shadow(&["feasible", s(&empty)]).0, 2);
    assert_eq!(shadow(&["feasible", s(&empty), "--method", "subdet"]).0, 2);
    assert_eq!(shadow(&["solve", s(&empty), "--objective", "1"]).0, 2);

    let orthant = write(&dir, "orthant.json", r#"{"A": [[-1, 0], [0, -1]], "b": [0, 0]}"#);
    let (code, out, _) = shadow(&["solve", s(&orthant), "--objective", "1,1"]);
    assert_eq!((code, out["status"].as_str()), (3, Some("unbounded")));
    let (code, out, _) = shadow(&["solve", s(&orthant), "--objective", "-1,-2"]);
    assert_eq!((code, out["value"].as_str()), (0, Some("0")));

    // unshifted, the segment from (-1,-1) to (1,1) passes through 0 where all four cones meet
    let square = write(
        &dir,
        "square.json",
        r#"{"A": [[1, 0], [0, 1], [-1, 0], [0, -1]], "b": [1, 1, 0, 0]}"#,
    );
    let (code, _, err) = shadow(&["solve", s(&square), "--objective", "1,1", "--start", "2,3", "--zero-shift"]);
    assert_eq!(code, 4, "{err}");
    assert_eq!(shadow(&["solve", s(&square), "--objective", "1,1", "--start", "2,3"]).0, 0);

    let bad = write(&dir, "bad.json", r#"{"A": [[1, "x"]], "b": [1]}"#);
    assert_eq!(shadow(&["feasible", s(&bad)]).0, 1);
    assert_eq!(shadow(&["solve", s(&square), "--objective", "1,1", "--start", "0,2"]).0, 1);
}

#[test]
fn bound_and_certify() {
    let dir = TempDir::new().unwrap();
    let orthant = write(&dir, "orthant.json", r#"{"A": [[-1, 0], [0, -1]], "b": [0, 0]}"#);
    let bounded = dir.path().join("bounded.json");
    let (code, rep, _) = shadow(&["bound", s(&orthant), "--mode", "global", "-o", s(&bounded)]);
    assert_eq!(code, 0);
    assert_eq!(rep["original_rows"], 2);
    let (code, tau, _) = shadow(&["certify", "tau", s(&bounded)]);
    assert_eq!(code, 0);
    assert_eq!(tau["tau_sq"], "1/2");
    assert_eq!(shadow(&["certify", "tau", s(&orthant)]).0, 3);

    let (code, d, _) = shadow(&["certify", "delta", s(&bounded)]);
    assert_eq!(code, 0);
    assert_eq!(d["local_delta_sq"], "1");
    let (_, sd, _) = shadow(&["certify", "subdet", s(&bounded)]);
    assert_eq!(sd["delta"], "1/2");

    let (code, m, _) = shadow(&["certify", "matching", "--complete", "6"]);
    assert_eq!(code, 0);
    assert_eq!(m["certificates"].as_array().unwrap().len(), 15);
}

#[test]
fn diameter_and_experiment() {
    let dir = TempDir::new().unwrap();
    let cube = dir.path().join("cube.json");
    shadow(&["gen", "--kind", "cube", "--n", "3", "-o", s(&cube)]);
    let (code, path, _) = shadow(&["diameter", s(&cube), "--seed", "3"]);
    assert_eq!(code, 0);
    assert_eq!(path["valid"], true);
    assert!(path["length"].as_u64().unwrap() >= 3);

    let csv = dir.path().join("trials.csv");
    let args = [
        "experiment",
        s(&cube),
        "--kind",
        "crossings-shifted",
        "--trials",
        "200",
        "--seed",
        "5",
        "--d",
        "2,0,0",
        "--csv",
        s(&csv),
    ];
    let (code, a, _) = shadow(&args);
    assert_eq!(code, 0);
    assert_eq!(a["pass"], true);
    let first = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(first.lines().count(), 201);
    let (_, b, _) = shadow(&args);
    assert_eq!(a, b);
    assert_eq!(first, std::fs::read_to_string(&csv).unwrap());

    let (code, _, _) = shadow(&["experiment", s(&cube), "--kind", "crossings-scaled", "--alpha", "2"]);
    assert_eq!(code, 1);
}
