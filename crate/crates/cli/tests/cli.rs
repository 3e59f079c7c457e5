use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn detlab(args: &[&str], cache: Option<&Path>) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_detlab"));
    c.args(args).env_remove("DETLAB_CACHE");
    if let Some(dir) = cache {
        c.env("DETLAB_CACHE", dir);
    }
    c.output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is json")
}

#[test]
fn wr_poly_gamma() {
    let out = detlab(&["wr-poly", "--r", "3"], None);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let gamma: Vec<&str> = v["results"]["gamma"].as_array().unwrap().iter().map(|x| x.as_str().unwrap()).collect();
    assert_eq!(gamma, ["0", "0", "0", "-860160", "737280", "-294912", "65536"]);
    assert_eq!(v["verified"], Value::Bool(true));
    for key in ["command", "tool_version", "timestamp", "params", "precision_used", "results", "error_bounds"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn small_minor_is_positive() {
    let out = detlab(&["det", "--n", "1", "--r", "3", "--prec", "40"], None);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["results"]["sign"], "+");
    let val: f64 = v["results"]["minor"]["value"].as_str().unwrap().parse().unwrap();
    assert!(val > 0.0);
}

#[test]
fn zero_pattern_order_two() {
    let out = detlab(&["conj3", "--r", "2"], None);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["results"]["holds"], Value::Bool(true));
}

#[test]
fn output_is_deterministic_apart_from_timestamp() {
    let dir = tempfile::tempdir().unwrap();
    let mut reports = Vec::new();
    for name in ["a.json", "b.json"] {
        let p = dir.path().join(name);
        let out = detlab(&["beta", "--n", "5", "--prec", "30", "--out", p.to_str().unwrap()], None);
        assert_eq!(out.status.code(), Some(0));
        assert!(out.stdout.is_empty());
        let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap();
        v.as_object_mut().unwrap().remove("timestamp");
        reports.push(serde_json::to_string(&v).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(detlab(&["det", "--n", "1"], None).status.code(), Some(2));
    assert_eq!(detlab(&["no-such-command"], None).status.code(), Some(2));
    assert_eq!(detlab(&["wr-poly", "--r", "3", "--prec", "0"], None).status.code(), Some(2));
    assert_eq!(detlab(&["q-scan", "--u-min", "0", "--u-max", "1", "--step", "0.5"], None).status.code(), Some(2));
}

#[test]
fn csv_output() {
    let out = detlab(&["cvpoly", "--k", "3", "--format", "csv"], None);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "k,coefficients");
    assert_eq!(lines[2], "2,-15 30 -8");
    assert_eq!(lines.len(), 4);
}

#[test]
fn cache_roundtrip_and_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let first = detlab(&["beta", "--n", "4", "--prec", "30"], Some(dir.path()));
    assert_eq!(first.status.code(), Some(0));
    let file = dir.path().join("beta-table.json");
    let stored = std::fs::read_to_string(&file).unwrap();
    assert!(stored.contains("sha256"));
    let second = detlab(&["beta", "--n", "4", "--prec", "30"], Some(dir.path()));
    assert_eq!(json(&first)["results"], json(&second)["results"]);

    std::fs::write(&file, stored.replacen("\"n\": 2", "\"n\": 7", 1)).unwrap();
    let bad = detlab(&["beta", "--n", "4", "--prec", "30"], Some(dir.path()));
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("cache"));
}
