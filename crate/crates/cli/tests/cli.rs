use std::process::{Command, Output};

use serde_json::Value;

fn c2e(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_c2e")).args(args).output().expect("binary runs")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("JSON on stdout")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn charts_lists_the_registry() {
    let o = c2e(&["charts"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    for name in ["flat", "s2xs2", "schwarzschild", "perturbed2"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name}");
    }
}

#[test]
fn classify_type_three() {
    let o = c2e(&["classify", "--psi", "0,0,0,1,0"]);
    assert_eq!(code(&o), 0);
    let s = &json(&o)["summary"];
    assert_eq!(s["petrov"], "III");
    assert_eq!(s["rank"], 4);
    assert!(s["weyl_squared"].as_f64().unwrap().abs() < 1e-12);
}

#[test]
fn classify_type_n_is_not_generic() {
    let o = c2e(&["classify", "--psi", "0,0,0,0,1"]);
    assert_eq!(code(&o), 0);
    let s = &json(&o)["summary"];
    assert_eq!(s["petrov"], "N");
    assert!(s["rank"].as_u64().unwrap() < 4);
    assert_eq!(s["route"], Value::Null);
}

#[test]
fn classify_coulomb_scalar() {
    let o = c2e(&["classify", "--psi", "0,0,1,0,0"]);
    let d = json(&o);
    assert_eq!(d["schema"], 1);
    assert!((d["summary"]["weyl_squared"].as_f64().unwrap() - 48.0).abs() < 1e-10);
}

#[test]
fn classify_accepts_complex_scalars_and_charts() {
    let o = c2e(&["classify", "--psi", "0,0,0.7071067811865476+0.7071067811865476i,0,0"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["summary"]["route"], "cubic");
    let o = c2e(&["classify", "--chart", "schwarzschild", "--at", "0,5,1.1,0.2"]);
    assert_eq!(code(&o), 0);
    let w2 = json(&o)["summary"]["weyl_squared"].as_f64().unwrap();
    assert!((w2 - 48.0 / 5f64.powi(6)).abs() < 1e-12);
}

#[test]
fn malformed_input_exits_two() {
    for args in [
        &["classify", "--psi", "0,0,1,0"][..],
        &["classify", "--psi", "0,0,one,0,0"],
        &["classify", "--chart", "s2xs2", "--at", "0,0,0,0"],
        &["verify", "--suite", "identities", "--chart", "torus"],
        &["verify", "--suite", "bogus"],
        &["verify", "--chart", "flat"],
        &["verify", "--suite", "identities", "--order", "3"],
        &["verify", "--suite", "bgg-flat", "--at", "0,0"],
    ] {
        let o = c2e(args);
        assert_eq!(code(&o), 2, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn onesol_on_flat_space_is_not_generic() {
    let o = c2e(&["verify", "--chart", "flat", "--suite", "onesol", "--points", "2"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("not generic"));
}

#[test]
fn verify_reports_schema_and_config() {
    let o = c2e(&["verify", "--suite", "bgg-flat", "--points", "2", "--trials", "1", "--seed", "4"]);
    assert_eq!(code(&o), 0);
    let d = json(&o);
    assert_eq!(d["schema"], 1);
    assert_eq!(d["passed"], true);
    let c = &d["config"];
    assert_eq!((c["suite"].as_str(), c["chart"].as_str()), (Some("bgg-flat"), Some("flat")));
    assert_eq!((c["points"].as_u64(), c["seed"].as_u64(), c["order"].as_u64()), (Some(2), Some(4), Some(5)));
    assert_eq!(c["tol"], 1e-8);
    assert!(d["timing"]["seconds"].as_f64().is_some());
    assert_eq!(d["report"]["points"].as_array().unwrap().len(), 2);
}

#[test]
fn failing_check_exits_one() {
    let o = c2e(&["verify", "--suite", "bgg-flat", "--points", "1", "--trials", "1", "--tol", "1e-300"]);
    assert_eq!(code(&o), 1);
    assert_eq!(json(&o)["passed"], false);
}

#[test]
fn out_and_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"suite": "proj", "chart": "perturbed2", "points": 3, "trials": 1, "seed": 2}"#).unwrap();
    let out = dir.path().join("report.json");
    let o = c2e(&["verify", "--config", cfg.to_str().unwrap(), "--points", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let d: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(d["config"]["suite"], "proj");
    assert_eq!(d["config"]["points"], 1);
    assert_eq!(d["config"]["seed"], 2);
    assert_eq!(d["report"]["chart"], "perturbed2:1");
}

#[test]
fn repeated_runs_agree_apart_from_timing() {
    let args = ["verify", "--suite", "identities", "--chart", "perturbed:2", "--points", "2", "--trials", "2", "--seed", "7"];
    let (a, b) = (json(&c2e(&args)), json(&c2e(&args)));
    assert_eq!(c2e_cli::report_body(&a), c2e_cli::report_body(&b));
    let mut other = args;
    other[10] = "8";
    assert_ne!(c2e_cli::report_body(&a), c2e_cli::report_body(&json(&c2e(&other))));
}
