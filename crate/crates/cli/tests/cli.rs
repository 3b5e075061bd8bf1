use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn mdthresh(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mdthresh"))
        .args(args)
        .env_remove("MDTHRESH_SEED")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = mdthresh(args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&ok(args)).expect("stdout is json")
}

#[test]
fn table_matches_golden_file() {
    let got = ok(&[
        "table",
        "--n",
        "5,10,100,1000,100000",
        "--prior",
        "cauchy:0,1",
        "--sigma",
        "1",
        "--odds",
        "1:1",
        "--paper-parity",
    ]);
    assert_eq!(got, include_str!("golden/table1.csv"));
}

#[test]
fn table_full_precision_by_default() {
    let csv = ok(&["table", "--n", "100"]);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n,t_rs,t_np,t_ev,p_at_rs"));
    let cells: Vec<f64> = lines
        .next()
        .unwrap()
        .split(',')
        .map(|c| c.parse().unwrap())
        .collect();
    assert!((cells[1] - 2.2487225).abs() < 1e-6);
    assert!((cells[2] - 1.959964).abs() < 1e-6);
    assert!((cells[3] - 2.4477468).abs() < 1e-6);
    let rows = json(&["table", "--n", "10,1000", "--format", "json"]);
    assert_eq!(rows.as_array().unwrap().len(), 2);
    assert_eq!(rows[1]["n"], 1000);
}

#[test]
fn threshold_reports_terms() {
    let v = json(&[
        "threshold",
        "--n",
        "1000",
        "--prior",
        "cauchy:0,1",
        "--sigma",
        "1",
    ]);
    assert!((v["t_crit"].as_f64().unwrap() - 2.71).abs() < 0.01);
    assert_eq!(v["method"], "asymptotic_thm1");
    let terms = &v["terms"];
    let sum: f64 = ["log_n", "prior_term", "info_term", "odds_term"]
        .iter()
        .map(|k| terms[k].as_f64().unwrap())
        .sum();
    assert!((sum - v["t_crit_sq"].as_f64().unwrap()).abs() < 1e-12);
    let parity = json(&["threshold", "--n", "1000", "--paper-parity"]);
    assert_eq!(parity["t_crit"].as_f64(), Some(2.71));
}

#[test]
fn odds_scale_does_not_matter() {
    let a = ok(&["threshold", "--n", "1000", "--odds", "1:1"]);
    let b = ok(&["threshold", "--n", "1000", "--odds", "2:2"]);
    assert_eq!(a, b);
    let c = ok(&["threshold", "--n", "1000", "--odds", "3:1"]);
    assert_ne!(a, c);
}

#[test]
fn numeric_method_hits_conjugate_root() {
    let v = json(&[
        "threshold",
        "--n",
        "100",
        "--prior",
        "gaussian:0,1",
        "--method",
        "numeric",
    ]);
    let expected = 1.01 * 101f64.ln();
    assert!((v["t_crit_sq"].as_f64().unwrap() - expected).abs() < 1e-8);
    assert_eq!(v["method"], "numeric_root");
}

#[test]
fn other_methods() {
    let h = json(&["threshold", "--n", "1000", "--method", "horseshoe"]);
    assert!((h["t_crit_sq"].as_f64().unwrap() - 3.042466).abs() < 1e-6);
    assert_eq!(h["assumed_constant"].as_f64(), Some(0.0));
    let f = json(&[
        "threshold",
        "--n",
        "1000",
        "--fisher",
        "4",
        "--prior",
        "cauchy:0,1",
    ]);
    assert_eq!(f["method"], "asymptotic_thm2");
    let out = mdthresh(&[
        "threshold",
        "--n",
        "1000",
        "--method",
        "rs",
        "--k",
        "2",
        "--m",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["t_crit_sq"].as_f64().unwrap() - 2.0 * 1000f64.ln()).abs() < 1e-9);
    assert!(String::from_utf8_lossy(&out.stderr).contains("--m"));
}

#[test]
fn lindley_demo() {
    let v = json(&["lindley", "--n", "1000", "--t", "1.96"]);
    let bf = v["bf01"].as_f64().unwrap();
    assert!((5.7..=5.9).contains(&bf), "{bf}");
    assert_eq!(v["verdict"], "below boundary");
    let small = json(&["lindley", "--n", "5", "--t", "1.96"]);
    assert_eq!(small["verdict"], "above boundary");
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| mdthresh(args).status.code();
    assert_eq!(code(&["threshold"]), Some(2));
    assert_eq!(
        code(&["threshold", "--n", "100", "--prior", "bogus:1"]),
        Some(2)
    );
    assert_eq!(code(&["threshold", "--n", "100", "--odds", "1"]), Some(2));
    assert_eq!(code(&["frobnicate"]), Some(2));
    assert_eq!(
        code(&["threshold", "--n", "1000", "--prior", "horseshoe:1"]),
        Some(2)
    );
    assert_eq!(
        code(&["tails", "--n", "100", "--mc", "--reps", "10"]),
        Some(2)
    );
    // The evidence never falls to a cutoff of 1e-300.
    let out = mdthresh(&[
        "threshold",
        "--n",
        "100",
        "--prior",
        "gaussian:0,1",
        "--method",
        "numeric",
        "--odds",
        "1:1e-300",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(out.stdout.is_empty());
    assert!(!out.stderr.is_empty());
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    fs::write(&cfg, "# shared settings\nn = 100\nprior = gaussian:0,1\nmethod = numeric\nreps = 5\npaper_parity = true\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let from_file = json(&["--config", cfg, "threshold"]);
    assert_eq!(from_file["n"], 100);
    assert_eq!(from_file["method"], "numeric_root");
    assert_eq!(from_file["t_crit"].as_f64(), Some(2.16));
    let overridden = json(&["threshold", "--config", cfg, "--n", "1000"]);
    assert_eq!(overridden["n"], 1000);
    assert_eq!(overridden["prior"], "gaussian:0,1");

    let bad = dir.path().join("bad.conf");
    fs::write(&bad, "no_such_flag = 1\n").unwrap();
    assert_eq!(
        mdthresh(&["threshold", "--config", bad.to_str().unwrap(), "--n", "10"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        mdthresh(&["threshold", "--config", "/nonexistent/x.conf", "--n", "10"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn seed_from_environment_and_flag() {
    let run = |env: Option<&str>, extra: &[&str]| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_mdthresh"));
        cmd.args(["tails", "--n", "100", "--a", "1", "--mc", "--reps", "20000"])
            .args(extra);
        match env {
            Some(s) => cmd.env("MDTHRESH_SEED", s),
            None => cmd.env_remove("MDTHRESH_SEED"),
        };
        let out = cmd.output().unwrap();
        assert!(out.status.success());
        String::from_utf8(out.stdout).unwrap()
    };
    let env5 = run(Some("5"), &[]);
    assert_eq!(env5, run(None, &["--seed", "5"]));
    assert_eq!(env5, run(Some("5"), &[]));
    assert_ne!(env5, run(Some("6"), &[]));
    assert_eq!(run(Some("6"), &["--seed", "5"]), env5);
}

#[test]
fn tails_and_chernoff() {
    let v = json(&["tails", "--n", "100", "--a", "1"]);
    assert_eq!(v["regime"], "MODERATE");
    assert!((v["md_approx"].as_f64().unwrap() - 0.037180670664321).abs() < 1e-12);
    assert!((v["exact"].as_f64().unwrap() - 0.0318756893).abs() < 1e-9);
    assert_eq!(
        json(&["tails", "--n", "100", "--c-root", "2"])["regime"],
        "CLT"
    );
    assert_eq!(
        json(&["tails", "--n", "100", "--lambda", "0.3"])["regime"],
        "LARGE"
    );
    assert_eq!(
        mdthresh(&["tails", "--n", "100", "--a", "1", "--lambda", "0.3"])
            .status
            .code(),
        Some(2)
    );

    let c = json(&["chernoff", "--theta0", "0", "--theta1", "1", "--n", "100"]);
    assert!((c["d_c"].as_f64().unwrap() - 0.125).abs() < 1e-9);
    let ratio = c["ratio"].as_f64().unwrap();
    assert!((1.0..=1.1).contains(&ratio));
    let b = json(&[
        "chernoff",
        "--family",
        "bernoulli",
        "--theta0",
        "0.2",
        "--theta1",
        "0.8",
    ]);
    assert!((b["d_c"].as_f64().unwrap() + 0.8f64.ln()).abs() < 1e-9);
}

#[test]
fn risk_curve_to_stdout_and_file() {
    let csv = ok(&["risk-curve", "--n", "1000", "--points", "31"]);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "c,alpha,beta,total");
    assert_eq!(lines.len(), 33);
    assert!(lines[32].starts_with("# c_star="));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("curve.csv");
    let v = json(&[
        "risk-curve",
        "--n",
        "1000",
        "--points",
        "31",
        "--out",
        path.to_str().unwrap(),
        "--format",
        "json",
    ]);
    let c_star = v["c_star"].as_f64().unwrap();
    assert!((c_star - 2.7159).abs() < 1e-3, "{c_star}");
    let written: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(written["grid"].as_array().unwrap().len(), 31);
}

#[test]
fn lab_experiments() {
    let out = mdthresh(&[
        "lab",
        "--experiment",
        "dawid",
        "--n",
        "200",
        "--reps",
        "100",
        "--seed",
        "3",
    ]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["reference"], "chi2_1");
    assert!(v.get("statistic_samples").is_none());
    let with = json(&[
        "lab",
        "--experiment",
        "dawid",
        "--n",
        "200",
        "--reps",
        "100",
        "--seed",
        "3",
        "--samples",
    ]);
    assert_eq!(with["statistic_samples"].as_array().unwrap().len(), 100);
    assert_eq!(with["ks_p"], v["ks_p"]);

    let bic = json(&["lab", "--experiment", "bic", "--n-list", "100,10000"]);
    assert!(bic["band_width"].as_f64().unwrap() <= 3.0);
    assert_eq!(bic["limit"].as_f64(), Some(-0.125));
    assert_eq!(
        mdthresh(&["lab", "--experiment", "bic", "--tau", "0.01"])
            .status
            .code(),
        Some(2)
    );
}
