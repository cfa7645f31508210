use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_poisson-lebesgue")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn n0_prints_1225() {
    let out = run(&["n0", "--alpha", "1", "--r", "0.5", "--p", "1"]);
    assert!(out.status.success());
    assert_eq!(json(&out)["n0"], 1225);
}

#[test]
fn hyp2f1_near_half_pi() {
    let out = run(&["hyp2f1", "--a", "0.5", "--b", "0.5", "--c", "1.5"]);
    let v = json(&out)["value"].as_f64().unwrap();
    assert!((v - std::f64::consts::FRAC_PI_2).abs() < 1e-10);
}

#[test]
fn csv_format() {
    let out = run(&["is-integral", "--s", "2", "--v", "1", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "s,v,value");
    let value: f64 = lines.next().unwrap().split(',').nth(2).unwrap().parse().unwrap();
    assert!((value - (std::f64::consts::PI / 4.0).sqrt()).abs() < 1e-12);
}

#[test]
fn usage_domain_and_accuracy_exit_codes() {
    let missing = run(&["n0", "--r", "0.5"]);
    assert_eq!(missing.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&missing.stderr).unwrap();
    assert_eq!(err["error"], "usage");
    assert_eq!(run(&["n0", "--alpha", "1", "--r", "0.5", "--bogus"]).status.code(), Some(2));

    let domain = run(&["n0", "--alpha", "1", "--r", "1.5", "--p", "1"]);
    assert_eq!(domain.status.code(), Some(3));
    let err: Value = serde_json::from_slice(&domain.stderr).unwrap();
    assert_eq!(err["error"], "domain");
    assert!(err["context"].is_string());
    assert_eq!(run(&["hyp2f1", "--a", "1", "--b", "1", "--c", "1.5"]).status.code(), Some(3));
}

#[test]
fn best_approx_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("f.json");
    std::fs::write(&input, r#"{"a0": 0.0, "cos": [0.0, 0.0, 1.0], "sin": [0.0, 0.0, 0.0]}"#).unwrap();
    let argmin = dir.path().join("t.json");
    let out = run(&[
        "best-approx",
        "--input",
        input.to_str().unwrap(),
        "--n",
        "3",
        "--p",
        "2",
        "--argmin-out",
        argmin.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let upper = json(&out)["upper"].as_f64().unwrap();
    assert!((upper - std::f64::consts::PI.sqrt()).abs() < 1e-10);
    assert!(argmin.exists());
}

#[test]
fn verify_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("rows.csv");
    let common = ["verify", "--alpha", "1", "--r", "0.5", "--p", "2", "--n", "16", "--samples", "3", "--degree-cap", "32"];
    let mut args = common.to_vec();
    args.extend(["--format", "csv", "--out", csv.to_str().unwrap()]);
    let out = run(&args);
    assert!(out.status.code().is_some_and(|c| c == 0 || c == 1));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("alpha,r,beta,p,n,lhs,lhs_radius,en_lower,en_upper,rhs_main,rhs_full,implied_gamma,pass"));
    assert_eq!(text.lines().count(), 4);

    let out = run(&common);
    let summary = json(&out);
    assert_eq!(summary["checked"], 3);
    assert!(summary["runtime_seconds"].is_number());
}

#[test]
fn rhs_and_kernel_norm() {
    let out = run(&["rhs", "--alpha", "1", "--r", "0.5", "--p", "1", "--n", "1225", "--gamma", "0"]);
    let v = json(&out);
    let expected_ln = (35.0 * 2.0 / std::f64::consts::PI).ln() - 35.0;
    let got_ln = v["mantissa"].as_f64().unwrap().ln() + v["log_scale"].as_f64().unwrap();
    assert!((got_ln - expected_ln).abs() < 1e-12);

    let out = run(&["kernel-norm", "--alpha", "1", "--r", "0.5", "--n", "1225", "--s", "inf"]);
    let v = json(&out);
    assert!((v["log_scale"].as_f64().unwrap() + 35.0).abs() < 1e-12);
    assert!(v["implied_delta"].as_f64().unwrap().abs() < (14.0 * std::f64::consts::PI).powi(2));
}
