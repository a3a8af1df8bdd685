use std::fs;
use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_freeprob"))
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn run_json(args: &[&str]) -> (i32, Value) {
    let out = bin().args(args).output().unwrap();
    let v = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap(), v)
}

#[test]
fn entropy_of_semicircle() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "s.json", r#"{"family": "semicircle", "params": {"mean": 0, "variance": 1}}"#);
    let (code, v) = run_json(&["entropy", "--measure", &m]);
    assert_eq!(code, 0);
    let chi = v["result"]["chi"].as_f64().unwrap();
    assert!((chi - 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E).ln()).abs() < 1e-3);
    assert_eq!(v["tool"], "freeprob");
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(v["config"]["command"]["entropy"]["measure"], m.as_str());
}

#[test]
fn reports_are_byte_identical_and_written_atomically() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "u.json", r#"{"family": "uniform", "params": {"c": 1.7320508075688772}}"#);
    let out = dir.path().join("r.json");
    let out = out.to_str().unwrap();
    let mut texts = Vec::new();
    for _ in 0..2 {
        let status = bin().args(["--output", out, "lsi", "--measure", &m]).status().unwrap();
        assert!(status.success());
        texts.push(fs::read(out).unwrap());
    }
    assert_eq!(texts[0], texts[1]);
    let leftovers: Vec<_> = fs::read_dir(dir.path())
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_name().to_string_lossy().ends_with(".tmp"))
        .collect();
    assert!(leftovers.is_empty());
}

#[test]
fn floats_carry_twelve_significant_digits() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "s.json", r#"{"family": "semicircle", "params": {"mean": 0, "variance": 2}}"#);
    let out = bin().args(["stein", "--measure", &m, "--degree", "3"]).output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    let v: Value = serde_json::from_str(&text).unwrap();
    let x = v["result"]["discrepancy_lb"].as_f64().unwrap();
    assert_eq!(x, format!("{x:.11e}").parse::<f64>().unwrap());
    assert!((x - 1.0).abs() < 1e-6);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let b = write(dir.path(), "b.json", r#"{"family": "bernoulli"}"#);
    let bad = write(dir.path(), "bad.json", r#"{"family": "semicircle", "params": {"sigma": 1}}"#);
    // unknown flag, unknown family parameter, missing file: configuration errors
    assert_eq!(bin().args(["entropy", "--measure", &b, "--bogus"]).status().unwrap().code(), Some(1));
    assert_eq!(bin().args(["entropy", "--measure", &bad]).status().unwrap().code(), Some(1));
    assert_eq!(bin().args(["entropy", "--measure", "/nonexistent.json"]).status().unwrap().code(), Some(1));
    assert_eq!(bin().args(["stein", "--measure", &b, "--degree", "11"]).status().unwrap().code(), Some(1));
    // a computation that cannot proceed: free Stam with atoms summing above one
    let d = write(dir.path(), "d.json", r#"{"atoms": [[0.0, 1.0]]}"#);
    let (code, v) = run_json(&["stam", "--measure", &d, "--measure2", &d]);
    assert_eq!(code, 2, "{v}");
    assert!(v["error"].as_str().is_some());
    // a failing or vacuous inequality is still a successful run
    let (code, v) = run_json(&["lsi", "--measure", &b]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["vacuous"], true);
    assert_eq!(v["result"]["lhs"], "inf");
}

#[test]
fn transform_csv() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "s.json", r#"{"family": "semicircle"}"#);
    let out = bin()
        .args(["--format", "csv", "transform", "--measure", &m, "--x", "0.5,1.0", "--epsilon", "1"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines[0], "x,hilbert,cauchy_re,cauchy_im");
    assert_eq!(lines.len(), 3);
    // H(x) = x/2 inside [−2, 2] for the standard semicircle
    let h: f64 = lines[1].split(',').nth(1).unwrap().parse().unwrap();
    assert!((h - 0.25).abs() < 1e-6);
}

#[test]
fn fock_example() {
    let (code, v) = run_json(&["fock", "--n", "2", "--q", "0.3", "--depth", "6"]);
    assert_eq!(code, 0);
    let r = &v["result"];
    assert!(r["max_stein_residual"].as_f64().unwrap() < 1e-10);
    assert!(r["max_moment_deviation"].as_f64().unwrap() < 1e-12);
    let bound = 0.6 / (1.0f64 - 0.18).sqrt();
    assert!((r["bound"].as_f64().unwrap() - bound).abs() < 1e-9);

    let dir = tempfile::tempdir().unwrap();
    let q = write(dir.path(), "q.txt", "0.3 0.3\n0.3 0.3\n");
    let (code, v) = run_json(&["fock", "--qmatrix", &q, "--depth", "6"]);
    assert_eq!(code, 0);
    assert!((v["result"]["bound"].as_f64().unwrap() - bound).abs() < 1e-9);
    let asym = write(dir.path(), "a.txt", "0.3 0.1\n0.2 0.3\n");
    assert_eq!(bin().args(["fock", "--qmatrix", &asym]).status().unwrap().code(), Some(1));
}

#[test]
fn ncpoly_check_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "f.txt", "# V_1 + t1^4\n0.5 0 1 1\n0.5 0 2 2\n1 0 1 1 1 1\n");
    let a = bin().args(["ncpoly-check", "--poly-file", &p, "--rng-seed", "3", "--samples", "20"]).output().unwrap();
    let b = bin().args(["ncpoly-check", "--poly-file", &p, "--rng-seed", "3", "--samples", "20"]).output().unwrap();
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["result"]["all_hold"], true);
    assert_eq!(v["result"]["rows"].as_array().unwrap().len(), 20);
    assert_eq!(bin().args(["ncpoly-check", "--poly-file", &p]).status().unwrap().code(), Some(1));
}

#[test]
fn clt_table() {
    let dir = tempfile::tempdir().unwrap();
    let b = write(dir.path(), "b.json", r#"{"family": "bernoulli"}"#);
    let (code, v) = run_json(&["clt", "--measure", &b, "--n-list", "2"]);
    assert_eq!(code, 0);
    let gap = v["result"]["rows"][0]["entropy_gap"].as_f64().unwrap();
    assert!((gap - (0.5 * std::f64::consts::LN_2 - 0.25)).abs() < 1e-3);
}
