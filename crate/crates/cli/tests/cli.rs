use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn rieszcap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rieszcap"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn newtonian_ball_capacity_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let set = dir.path().join("ball3.json");
    fs::write(&set, r#"{"type": "ball", "dim": 3, "radius": 1.0}"#).unwrap();
    let o = rieszcap(&[
        "capacity",
        "--set",
        set.to_str().unwrap(),
        "--p",
        "1",
        "--ladder",
        "500,1000,2000",
        "--scheme",
        "boundary",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let cap = v["capacity"].as_f64().unwrap();
    assert!((cap - 1.0).abs() < 1e-3, "capacity {cap}");
    assert_eq!(v["closed_form"].as_f64(), Some(1.0));
}

#[test]
fn validate_passes_and_lists_gotz_identity() {
    let o = rieszcap(&["validate"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["pass"], Value::Bool(true));
    let names: Vec<&str> = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    for n in 1..=4 {
        assert!(
            names.iter().any(|s| s.starts_with(&format!("A({n},{n})"))),
            "n={n}"
        );
    }
}

#[test]
fn figure1_log_column() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig1.csv");
    let o = rieszcap(&["figure1", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let text = fs::read_to_string(&out).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[0][0], "n");
    let col = rows[0]
        .iter()
        .position(|h| *h == "0")
        .expect("p = 0 column");
    let want = [0.5, 1.0, 2.0 / 1f64.exp().sqrt(), 0.25f64.exp()];
    for (row, w) in rows[1..].iter().zip(want) {
        let got: f64 = row[col].parse().unwrap();
        assert!((got - w).abs() < 1e-12, "{got} vs {w}");
    }
}

#[test]
fn curve_csv_header_and_determinism() {
    let args = [
        "curve",
        "--set",
        r#"{"type": "interval", "a": -1, "b": 1}"#,
        "--p-grid=-1,0,0.5",
        "--ladder",
        "64",
    ];
    let a = rieszcap(&args);
    let b = rieszcap(&args);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("p,capacity,energy,gap,iterations,N,closed_form")
    );
    assert_eq!(lines.count(), 3);
}

#[test]
fn curve_closed_form_column_empty_without_oracle() {
    let o = rieszcap(&[
        "curve",
        "--set",
        r#"{"type": "box", "lo": [0, 0], "hi": [1, 1]}"#,
        "--p-grid",
        "0.5,1",
        "--ladder",
        "64",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for line in stdout(&o).lines().skip(1) {
        assert!(line.ends_with(','), "{line}");
    }
}

#[test]
fn equilibrium_reports_l1_for_interval() {
    let o = rieszcap(&[
        "equilibrium",
        "--set",
        r#"{"type": "interval", "a": -1, "b": 1}"#,
        "--p",
        "0",
        "--ladder",
        "256",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["l1_distance"].as_f64().unwrap() <= 0.05);
    let w = v["weights"].as_array().unwrap();
    assert_eq!(w.len(), v["node_count"].as_u64().unwrap() as usize);
    let sum: f64 = w.iter().map(|x| x.as_f64().unwrap()).sum();
    assert!((sum - 1.0).abs() < 1e-12);
}

#[test]
fn argument_errors_exit_two() {
    let bad = [
        vec!["capacity", "--set", "missing.json", "--p", "1"],
        vec![
            "curve",
            "--set",
            r#"{"type": "interval", "a": -1, "b": 1}"#,
            "--p-grid",
            "1,0",
        ],
        vec![
            "capacity",
            "--set",
            r#"{"type": "interval", "a": -1, "b": 1}"#,
            "--p",
            "1",
            "--format",
            "xml",
        ],
        vec![
            "capacity",
            "--set",
            r#"{"type": "interval", "a": -1, "b": 1}"#,
            "--p",
            "1",
            "--diag",
            "self-cell:2",
        ],
        vec!["capacity", "--set", r#"{"type": "blob"}"#, "--p", "1"],
        vec!["frobnicate"],
    ];
    for args in bad {
        let o = rieszcap(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(
            err.contains("Usage") || err.contains("--help"),
            "{args:?}: {err}"
        );
    }
}

#[test]
fn capacity_csv_uses_curve_header() {
    let o = rieszcap(&[
        "capacity",
        "--set",
        r#"{"type": "interval", "a": -1, "b": 1}"#,
        "--p=-1",
        "--ladder",
        "64",
        "--format",
        "csv",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("p,capacity,energy,gap,iterations,N,closed_form\n-1,"));
}
