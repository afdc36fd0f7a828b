use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn zipper(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zipper"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("ZIPPER_OUT")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

#[test]
fn sweep_is_byte_identical_across_runs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = [
        "sweep", "--L", "1", "--alpha", "0.5", "--z-grid", "8", "--steps", "100000", "--realizations", "16",
        "--seed", "42",
    ];
    let ra = zipper(a.path(), &args);
    let rb = zipper(b.path(), &args);
    assert_eq!(code(&ra), 0, "{}", String::from_utf8_lossy(&ra.stderr));
    assert_eq!(code(&rb), 0);
    let ca = std::fs::read(a.path().join("sweep.csv")).unwrap();
    let cb = std::fs::read(b.path().join("sweep.csv")).unwrap();
    assert_eq!(ca, cb);

    let text = String::from_utf8(ca).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    // 8 points x 2 exponents
    assert_eq!(rows.len(), 16);
    for r in &rows {
        let cols: Vec<&str> = r.split(',').collect();
        let gamma: f64 = cols[3].parse().unwrap();
        let se: f64 = cols[4].parse().unwrap();
        assert!(gamma.is_finite() && se.is_finite() && se > 0.0);
    }

    let manifest: Value = serde_json::from_slice(&std::fs::read(a.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seeds"].as_array().unwrap().len(), 8);
    assert_eq!(manifest["config"]["master_seed"], 42);
}

#[test]
fn thread_count_does_not_change_output() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["sweep", "--L", "2", "--alpha", "0.5", "--z-grid", "3", "--steps", "2000", "--realizations", "4"];
    let mut one = args.to_vec();
    one.extend(["--threads", "1"]);
    let mut three = args.to_vec();
    three.extend(["--threads", "3"]);
    assert_eq!(code(&zipper(a.path(), &one)), 0);
    assert_eq!(code(&zipper(b.path(), &three)), 0);
    assert_eq!(
        std::fs::read(a.path().join("sweep.csv")).unwrap(),
        std::fs::read(b.path().join("sweep.csv")).unwrap()
    );
}

#[test]
fn lie_check_verdicts() {
    let d = tempfile::tempdir().unwrap();
    let o = zipper(d.path(), &["lie-check", "--L", "1", "--alpha", "0.5", "--z", "1"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&std::fs::read(d.path().join("lie-check.json")).unwrap()).unwrap();
    assert_eq!(v["dimension"], 4);
    assert_eq!(v["verdict"], "pass");

    let d = tempfile::tempdir().unwrap();
    let o = zipper(d.path(), &["lie-check", "--L", "2", "--alpha", "0", "--z", "1"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&std::fs::read(d.path().join("lie-check.json")).unwrap()).unwrap();
    assert_eq!(v["dimension"], 8);
    assert_eq!(v["verdict"], "degenerate-as-predicted");
}

#[test]
fn config_errors_exit_2() {
    let d = tempfile::tempdir().unwrap();
    // not a strict contraction
    assert_eq!(code(&zipper(d.path(), &["lie-check", "--L", "1", "--alpha", "1.2", "--z", "1"])), 2);
    // off the unit circle
    assert_eq!(code(&zipper(d.path(), &["lyapunov", "--L", "1", "--z", "0.5,0.5", "--steps", "1000"])), 2);
    // too few steps
    assert_eq!(code(&zipper(d.path(), &["lyapunov", "--L", "1", "--z", "1", "--steps", "10"])), 2);
    // unknown flag
    assert_eq!(code(&zipper(d.path(), &["sweep", "--bogus"])), 2);
}

#[test]
fn refuses_to_overwrite_without_force() {
    let d = tempfile::tempdir().unwrap();
    let args = ["lie-check", "--L", "1", "--alpha", "0.3", "--z", "i"];
    assert_eq!(code(&zipper(d.path(), &args)), 0);
    assert_eq!(code(&zipper(d.path(), &args)), 2);
    let mut forced = args.to_vec();
    forced.push("--force");
    assert_eq!(code(&zipper(d.path(), &forced)), 0);
}

#[test]
fn alpha_from_file() {
    let d = tempfile::tempdir().unwrap();
    let f = d.path().join("alpha.json");
    std::fs::write(
        &f,
        r#"{"L": 2, "re": [[0.6, 0.0], [0.0, 0.2]], "im": [[0.0, 0.0], [0.0, 0.0]]}"#,
    )
    .unwrap();
    let out = d.path().join("run");
    let o = zipper(&out, &["lie-check", "--L", "2", "--alpha", f.to_str().unwrap(), "--z", "1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_slice(&std::fs::read(out.join("lie-check.json")).unwrap()).unwrap();
    assert_eq!(v["dimension"], 16);
}

#[test]
fn spectrum_json() {
    let d = tempfile::tempdir().unwrap();
    let o = zipper(d.path(), &["spectrum", "--L", "2", "--alpha", "0.5", "--n-blocks", "40", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_slice(&std::fs::read(d.path().join("spectrum.json")).unwrap()).unwrap();
    assert_eq!(v["eigenvalues"].as_array().unwrap().len(), 80);
    assert!(v["unitarity_residual"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn selftest_passes() {
    let o = Command::new(env!("CARGO_BIN_EXE_zipper")).arg("selftest").output().unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().all(|l| l.starts_with("PASS")));
}
