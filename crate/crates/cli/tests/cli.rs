use std::io::Write;
use std::process::Command;

use asymclone_cli::run_with;
use proptest::prelude::*;
use serde_json::Value;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("asymclone").chain(args.iter().copied());
    let code = run_with(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(args: &[&str]) -> Value {
    let (code, out, err) = run(args);
    assert_eq!(code, 0, "{err}");
    serde_json::from_str(&out).unwrap()
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

#[test]
fn solve_asymmetric_qubits() {
    let (code, out, _) = run(&["solve", "--task", "universal", "--d", "2", "--n", "2", "--alpha", "0.8,0.2", "--out", "json"]);
    assert_eq!(code, 0);
    assert!(out.contains("\"fidelity\": 0.907036751698"), "{out}");
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!((num(&v["fidelity"]) - (2.0 + 0.52f64.sqrt()) / 3.0).abs() < 1e-11);
    assert_eq!(v["method"], "dense");
}

#[test]
fn symmetric_report_lists_degeneracy() {
    let (_, out, _) = run(&["solve", "--task", "universal", "--d", "2", "--n", "2"]);
    assert!(out.contains("\"degeneracy\": 2"), "{out}");
}

#[test]
fn key_order_is_stable() {
    let (_, out, _) = run(&["solve", "--task", "equatorial", "--n", "2"]);
    let keys = ["\"task\"", "\"method\"", "\"fidelity\"", "\"per_clone\"", "\"degeneracy\"", "\"residual\""];
    let pos: Vec<usize> = keys.iter().map(|k| out.find(k).unwrap()).collect();
    assert!(pos.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn economy_report_for_two_qutrit_clones() {
    let (_, out, _) = run(&["economy", "--task", "universal", "--d", "3", "--n", "2", "--alpha", "0.6,0.4"]);
    assert!(out.contains("\"classification\": \"ancilla\""), "{out}");
    assert!(out.contains("\"ancilla_dim\": 3"), "{out}");
    let v = json(&["economy", "--task", "universal", "--d", "2", "--n", "3"]);
    assert_eq!(v["classification"], "economical");
    assert!(v["ancilla_dim"].is_null());
}

#[test]
fn sweep_csv_rows() {
    let (code, out, _) = run(&["sweep", "--task", "universal", "--d", "2", "--n", "2", "--grid", "101", "--out", "csv"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 102);
    assert_eq!(lines[0], "alpha_1,alpha_2,F_1,F_2,p_1,p_2,slack");
    assert_eq!(lines[101], "1,0,1,0.5,1,0.25,0");
    assert_eq!(lines[1], "0,1,0.5,1,0.25,1,0");
}

#[test]
fn sweep_over_three_clones_adds_vertices_and_centroid() {
    let v = json(&["sweep", "--task", "universal", "--d", "2", "--n", "3", "--grid", "5", "--seed", "9"]);
    let points = v["points"].as_array().unwrap();
    assert_eq!(points.len(), 3 + 1 + 5);
    assert_eq!(points[0]["alpha"], serde_json::json!([1, 0, 0]));
    for p in points {
        assert!(num(&p["slack"]).abs() < 1e-8);
    }
    assert_eq!(v["method"], "subspace");
}

#[test]
fn sweep_rejects_alpha() {
    let (code, _, err) = run(&["sweep", "--task", "universal", "--d", "2", "--n", "2", "--alpha", "0.5,0.5"]);
    assert_eq!(code, 1);
    assert_eq!(err.lines().count(), 1);
}

#[test]
fn gamma_presets_and_files() {
    let (code, out, _) = run(&["gamma", "--dist", "preset:uniform-sphere"]);
    assert_eq!(code, 0);
    assert_eq!(out, "0.166666666667\n");
    assert_eq!(run(&["gamma", "--dist", "preset:equator"]).1, "0.25\n");
    assert_eq!(run(&["gamma", "--dist", "preset:poles"]).1, "0\n");

    // Belt of half-width π/2 − a around the equator: Γ = (1 − cos²a/3)/4.
    let a = 1.0f64;
    let mut f = tempfile::NamedTempFile::new().unwrap();
    write!(f, "{{\"preset\": \"belt\", \"theta0\": {a}, \"theta1\": {}}}", std::f64::consts::PI - a).unwrap();
    let v = json(&["gamma", "--dist", f.path().to_str().unwrap(), "--out", "json"]);
    assert!((num(&v["gamma"]) - (1.0 - a.cos().powi(2) / 3.0) / 4.0).abs() < 1e-11);

    // Constant density on [0, π]: Γ = 1/8.
    let c = 1.0 / (2.0 * std::f64::consts::PI.powi(2));
    let mut f = tempfile::NamedTempFile::new().unwrap();
    write!(f, "{{\"knots\": [[0, {c}], [{}, {c}]]}}", std::f64::consts::PI).unwrap();
    let (code, out, _) = run(&["gamma", "--dist", f.path().to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(out, "0.125\n");
}

#[test]
fn validate_dist_reports_and_rejects() {
    let (code, out, _) = run(&["validate-dist", "--dist", "preset:uniform-sphere"]);
    assert_eq!(code, 0);
    assert!(out.contains("valid true"));
    let (code, _, err) = run(&["validate-dist", "--dist", "preset:belt:0:0.5"]);
    assert_eq!(code, 1);
    assert!(err.starts_with("error:"));
    let mut f = tempfile::NamedTempFile::new().unwrap();
    write!(f, "{{\"knots\": [[0, 1], [3, 1]]}}").unwrap();
    let (code, _, err) = run(&["validate-dist", "--dist", f.path().to_str().unwrap()]);
    assert_eq!(code, 1, "{err}");
}

#[test]
fn state_dependent_from_distribution() {
    let eq = json(&["solve", "--task", "equatorial", "--n", "3"]);
    let sd = json(&["solve", "--task", "state-dependent", "--n", "3", "--dist", "preset:equator"]);
    assert!((num(&eq["fidelity"]) - num(&sd["fidelity"])).abs() < 1e-12);
    assert!((num(&eq["fidelity"]) - 5.0 / 6.0).abs() < 1e-11);
    let uni = json(&["solve", "--task", "state-dependent", "--n", "3", "--dist", "preset:uniform-sphere"]);
    assert!((num(&uni["fidelity"]) - 7.0 / 9.0).abs() < 1e-11);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["solve", "--task", "universal", "--d", "2", "--n", "2", "--alpha", "0.8,0.3"]).0, 1);
    assert_eq!(run(&["solve", "--task", "state-dependent", "--n", "2", "--gamma", "0.1", "--dist", "preset:equator"]).0, 1);
    assert_eq!(run(&["solve", "--task", "universal", "--n", "2"]).0, 1);
    assert_eq!(run(&["solve", "--task", "equatorial", "--n", "2", "--d", "2"]).0, 1);
    assert_eq!(run(&["solve", "--bogus"]).0, 1);
    assert_eq!(run(&["frobnicate"]).0, 1);
    assert_eq!(run(&["solve", "--task", "universal", "--d", "2", "--n", "2", "--alpha", "0.7,0.3", "--method", "closed-form"]).0, 1);
    assert_eq!(run(&["solve", "--task", "universal", "--d", "2", "--n", "14", "--method", "dense"]).0, 1);
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("sweep"));
    let (_, _, err) = run(&["solve", "--task", "universal", "--d", "2", "--n", "2", "--alpha", "0.8,0.3"]);
    assert_eq!(err.lines().count(), 1);
}

#[test]
fn alpha_is_renormalized_within_tolerance() {
    let v = json(&["solve", "--task", "universal", "--d", "2", "--n", "3", "--alpha", "0.3333333333,0.3333333333,0.3333333333"]);
    let a: f64 = v["task"]["alpha"].as_array().unwrap().iter().map(num).sum();
    assert!((a - 1.0).abs() < 1e-15);
    assert!((num(&v["fidelity"]) - 7.0 / 9.0).abs() < 1e-9);
}

#[test]
fn method_choice_and_agreement() {
    let f: Vec<f64> = ["dense", "blocked", "subspace"]
        .iter()
        .map(|m| {
            let v = json(&["solve", "--task", "universal", "--d", "3", "--n", "3", "--alpha", "0.5,0.3,0.2", "--method", m]);
            assert_eq!(v["method"], *m);
            num(&v["fidelity"])
        })
        .collect();
    assert!((f[0] - f[1]).abs() < 1e-11 && (f[0] - f[2]).abs() < 1e-11, "{f:?}");
    let v = json(&["solve", "--task", "universal", "--d", "2", "--n", "12"]);
    assert_eq!(v["method"], "blocked");
    assert!((num(&v["fidelity"]) - 25.0 / 36.0).abs() < 1e-10);
    let v = json(&["solve", "--task", "chsh", "--alpha", "0.6,0.4", "--method", "closed-form"]);
    assert!((num(&v["fidelity"]) - 0.8605551275).abs() < 1e-9);
}

fn round_trip(args: &[&str]) {
    let (code, first, err) = run(args);
    assert_eq!(code, 0, "{err}");
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(first.as_bytes()).unwrap();
    let path = f.path().to_str().unwrap().to_string();
    let sub = args[0];
    let mut again = vec![sub, "--task-file", &path];
    let mut rest = args[1..].iter();
    while let Some(a) = rest.next() {
        if ["--method", "--out", "--precision"].contains(a) {
            again.push(a);
            again.push(rest.next().unwrap());
        }
    }
    let (code, second, err) = run(&again);
    assert_eq!(code, 0, "{err}");
    assert_eq!(first, second);
}

#[test]
fn task_file_round_trip() {
    round_trip(&["solve", "--task", "universal", "--d", "3", "--n", "3", "--alpha", "0.3333333333,0.3333333333,0.3333333334"]);
    round_trip(&["solve", "--task", "state-dependent", "--n", "3", "--dist", "preset:uniform-sphere", "--alpha", "0.2,0.3,0.5"]);
    round_trip(&["solve", "--task", "many-to-n", "--m", "2", "--n", "3", "--alpha", "0.1,0.2,0.7", "--method", "subspace"]);
    round_trip(&["economy", "--task", "equatorial", "--n", "2", "--alpha", "0.7,0.3"]);
}

#[test]
fn verify_suites_pass() {
    for (suite, d, n) in [("monogamy", "2", "3"), ("frontier", "3", "3"), ("methods", "2", "3"), ("chsh", "2", "2"), ("tradeoff", "2", "3")] {
        let v = json(&["verify", "--suite", suite, "--d", d, "--n", n, "--samples", "10", "--seed", "4"]);
        assert_eq!(v["passed"], true, "{suite}");
    }
}

#[test]
fn sweep_output_independent_of_thread_count() {
    let bin = env!("CARGO_BIN_EXE_asymclone");
    let args = ["sweep", "--task", "universal", "--d", "3", "--n", "3", "--grid", "30", "--out", "csv"];
    let outputs: Vec<Vec<u8>> = ["1", "3"]
        .iter()
        .map(|t| {
            let o = Command::new(bin).args(args).env("ASYMCLONE_THREADS", t).output().unwrap();
            assert!(o.status.success());
            o.stdout
        })
        .collect();
    assert_eq!(outputs[0], outputs[1]);
    let o = Command::new(bin).args(args).env("ASYMCLONE_THREADS", "zero").output().unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_asymclone");
    let o = Command::new(bin).args(["gamma", "--dist", "preset:nowhere"]).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(String::from_utf8(o.stderr).unwrap().lines().count(), 1);
    let o = Command::new(bin).args(["gamma", "--dist", "preset:uniform-sphere"]).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(o.stdout, b"0.166666666667\n");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn prop_round_trip_any_weights(a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let s = 1.0 + a + b;
        let alpha = format!("{},{},{}", 1.0 / s, a / s, b / s);
        round_trip(&["solve", "--task", "universal", "--d", "2", "--n", "3", "--alpha", &alpha]);
    }

    #[test]
    fn prop_format_float_parses_back(x in -10.0f64..10.0, p in 1usize..15) {
        let s = asymclone_cli::emit::format_float(x, p);
        let back: f64 = s.parse().unwrap();
        prop_assert!((back - x).abs() <= 0.5 * 10f64.powi(-(p as i32)) + 1e-15);
        prop_assert!(s != "-0");
        prop_assert!(!s.ends_with('.'));
    }
}
