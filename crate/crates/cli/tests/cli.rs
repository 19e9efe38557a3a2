use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn hardy(dir: &Path, config: &str, args: &[&str]) -> (Output, Option<Value>) {
    let cfg = dir.join("run.ini");
    std::fs::write(&cfg, config).unwrap();
    let out_dir = dir.join("out");
    let out = Command::new(env!("CARGO_BIN_EXE_hardy"))
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out_dir)
        .args(args)
        .output()
        .unwrap();
    let report = std::fs::read_to_string(out_dir.join("report.json"))
        .ok()
        .map(|s| serde_json::from_str(&s).unwrap());
    (out, report)
}

#[test]
fn config_error_reports_position() {
    let t = tempfile::tempdir().unwrap();
    let (out, report) = hardy(t.path(), "[domain]\nkind = ball\nradius = x\n", &["analyze"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3, column 10"), "{err}");
    assert!(report.is_none());
}

#[test]
fn unknown_key_is_rejected() {
    let t = tempfile::tempdir().unwrap();
    let (out, _) = hardy(t.path(), "[domain]\nkind = ball\nradios = 1\n", &["analyze"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn under_resolved_annulus_fails_with_config_error() {
    let t = tempfile::tempdir().unwrap();
    let cfg = "[domain]\nkind = annulus\ndim = 2\ninner = 0.05\nouter = 1\n[grid]\nresolution = 64\n";
    let (out, _) = hardy(t.path(), cfg, &["analyze"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("thinnest feature"));
}

#[test]
fn thin_annulus_is_not_mean_convex() {
    let t = tempfile::tempdir().unwrap();
    let cfg = "[domain]\nkind = annulus\ndim = 2\ninner = 0.05\nouter = 1\n[grid]\nresolution = 200\n";
    let (out, report) = hardy(t.path(), cfg, &["analyze"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report.unwrap();
    assert_eq!(r["convexity"]["weakly_mean_convex"], Value::Bool(false));
    assert!((r["convexity"]["H0"].as_f64().unwrap() + 20.0).abs() < 1e-9);
    assert_eq!(r["inf_equivalence"]["verdict_matches"], Value::Bool(true));
}

#[test]
fn lambda_refuses_non_convex_domain() {
    let t = tempfile::tempdir().unwrap();
    let cfg = "[domain]\nkind = annulus\ndim = 2\ninner = 0.5\nouter = 1\n[run]\nmode = analytic\n";
    let (out, _) = hardy(t.path(), cfg, &["lambda"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn critical_torus_lambda() {
    let t = tempfile::tempdir().unwrap();
    let cfg = "[domain]\nkind = torus\nminor = 1\nmajor = 2\n[run]\nmode = analytic\n";
    let (out, report) = hardy(t.path(), cfg, &["lambda"]);
    assert_eq!(out.status.code(), Some(0));
    let v = report.unwrap()["value"].as_f64().unwrap();
    assert!((v - 1.0).abs() < 1e-6, "{v}");
}

#[test]
fn disk_table_values() {
    let t = tempfile::tempdir().unwrap();
    let (out, report) = hardy(t.path(), "[domain]\nkind = ball\ndim = 2\nradius = 1\n", &["table"]);
    assert_eq!(out.status.code(), Some(0));
    let tab = &report.unwrap()["table"];
    let want = [
        ("lambda_BM", 0.0625),
        ("lambda_HHL", 0.5),
        ("lambda_FMT", 0.75),
        ("lambda_EL", 3.0),
        ("lambda_AW", 0.94 * 0.94),
        ("lambda_paper", 2.0),
    ];
    for (k, v) in want {
        let got = tab[k].as_f64().unwrap();
        assert!((got - v).abs() < 1e-9, "{k}: {got} vs {v}");
    }
}

#[test]
fn mu_writes_history_and_is_reproducible() {
    let t = tempfile::tempdir().unwrap();
    let cfg = "[domain]\nkind = ball\ndim = 2\nradius = 1\n[grid]\nresolution = 64\n[run]\nseed = 7\n";
    let (out, first) = hardy(t.path(), cfg, &["mu"]);
    assert_eq!(out.status.code(), Some(0));
    let hist = std::fs::read_to_string(t.path().join("out/history.csv")).unwrap();
    assert!(hist.starts_with("iter,value\n"));
    let (_, second) = hardy(t.path(), cfg, &["mu"]);
    assert_eq!(first, second);
    let v = first.unwrap()["value"].as_f64().unwrap();
    assert!(v > 0.25 && v < 0.6, "{v}");
}

#[test]
fn hardy_sobolev_quotient_of_minimizer_is_positive() {
    let t = tempfile::tempdir().unwrap();
    let cfg = "[domain]\nkind = ball\ndim = 3\nradius = 1\n[grid]\nresolution = 48\ngeometry = axisymmetric\n[run]\nq = 4\n";
    let (out, report) = hardy(t.path(), cfg, &["mu"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report.unwrap();
    assert!(r["hardy_sobolev"]["value"].as_f64().unwrap() > 0.0);
    assert!(r["flags"].as_array().unwrap().iter().any(|f| f == "hardy_sobolev_ambient_dimension"));
}

#[test]
fn hardy_sobolev_exponent_outside_window_is_rejected() {
    let t = tempfile::tempdir().unwrap();
    let cfg = "[domain]\nkind = ball\ndim = 3\nradius = 1\n[grid]\nresolution = 48\ngeometry = axisymmetric\n[run]\nq = 7\n";
    let (out, _) = hardy(t.path(), cfg, &["mu"]);
    assert_eq!(out.status.code(), Some(1));
}
