use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_weierdiv"))
}

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stderr_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).expect("error JSON on stderr")
}

#[test]
fn sigma_on_bundled_quartic() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("samples.csv");
    let svg = dir.path().join("sigma.svg");
    let poly = data("xd_minus_t2_d4.json");
    let out = run(&[
        "sigma",
        "--poly",
        poly.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
        "--svg",
        svg.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let sigma = v["sigma_hat"].as_f64().unwrap();
    assert!((sigma - 2.0).abs() < 0.1, "{sigma}");
    assert!(v["ci"].is_array() && v["bins"].is_array());
    assert!(std::fs::read_to_string(&csv).unwrap().starts_with("re,im,dist,rho"));
    assert!(std::fs::read_to_string(&svg).unwrap().contains("</svg>"));
}

#[test]
fn malformed_polynomial_names_field() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"d": 2, "m": 1, "coeffs": [[], [{"t_exponents": [2], "num": 1, "den": 0}]]}"#).unwrap();
    let out = run(&["sigma", "--poly", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_json(&out);
    assert_eq!(err["error"]["kind"], "input");
    assert_eq!(err["error"]["field"], "coeffs[1][0]");

    std::fs::write(&bad, r#"{"d": 2, "m": 1}"#).unwrap();
    let out = run(&["gamma", "--poly", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"]["field"], "coeffs");
}

#[test]
fn usage_and_io_errors_exit_2() {
    let out = run(&["sigma", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"]["kind"], "usage");
    let out = run(&["sigma", "--poly", "/definitely/missing.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"]["kind"], "io");
    let out = run(&["sigma", "--poly", data("x2_plus_t2.json").to_str().unwrap(), "--eta=-1"]);
    assert_eq!(stderr_json(&out)["error"]["field"], "eta");
}

#[test]
fn threads_env_is_validated() {
    let out = bin()
        .args(["seq", "--gevrey", "1"])
        .env("WEIERDIV_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().args(["seq", "--gevrey", "1"]).env("WEIERDIV_THREADS", "0").output().unwrap();
    assert_eq!(stderr_json(&out)["error"]["field"], "threads");
}

#[test]
fn divide_substitution_example() {
    let poly = data("xd_minus_t2_d3.json");
    let series = data("series_x_only_n12.json");
    let out = run(&["divide", "--poly", poly.to_str().unwrap(), "--series", series.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["residual_max"], 0.0);
    assert_eq!(v["r"].as_array().unwrap().len(), 3);
    // r_1 = c_1 + c_4 t² + c_7 t⁴ + c_10 t⁶ with c_7 = 5, c_10 = 1/7
    let r1 = &v["r"][1]["terms"];
    assert_eq!(r1.as_array().unwrap().len(), 2);
    assert_eq!(r1[0]["L"][0], 4);
    assert_eq!(r1[0]["num"], 5);
    assert_eq!(r1[1]["L"][0], 6);
    assert_eq!(r1[1]["den"], 7);
}

#[test]
fn divide_extremal_float_mode() {
    let poly = data("x2_plus_t2.json");
    let out = run(&["divide", "--poly", poly.to_str().unwrap(), "--extremal-gevrey", "1", "--order", "24", "--float"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["mode"], "float");
    assert!(v["residual_max"].as_f64().unwrap() < 1e-6);
    let ax = v["gevrey_fits"]["q_x"]["alpha_hat"].as_f64().unwrap();
    let at = v["gevrey_fits"]["q_t"]["alpha_hat"].as_f64().unwrap();
    assert!((ax - at).abs() <= 0.2, "{ax} vs {at}");
}

#[test]
fn gamma_writes_csv_and_fiber() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("gamma.csv");
    let poly = data("xd_minus_t2_d3.json");
    let out = run(&[
        "gamma",
        "--poly",
        poly.to_str().unwrap(),
        "--radial",
        "16",
        "--fiber",
        "0.01,0.02",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["fibers"][0]["result"]["rho"].as_f64().unwrap() > 0.0);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("re,im,t1,branch_id\n"));
    assert_eq!(text.lines().count() - 1, v["n_points"].as_u64().unwrap() as usize);
}

#[test]
fn seq_reports_regularity() {
    let out = run(&["seq", "--spec", data("seq_not_log_convex.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["regularity"]["log_convex"], false);
    let out = run(&["seq", "--gevrey", "2", "--j-max", "20", "--power", "1.5"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["regularity"]["log_convex"], true);
    assert!(v["values"][12]["legendre_rel_err"].as_f64().unwrap() < 1e-3);
}

#[test]
fn report_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "report",
        "--poly",
        data("x2_plus_t2.json").to_str().unwrap(),
        "--dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    for f in ["report.json", "gamma.csv", "gamma.svg", "sigma_samples.csv", "sigma.svg"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let v: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(v["assumptions"]["passes"], true);
}
