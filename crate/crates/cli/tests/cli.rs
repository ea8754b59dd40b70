use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn lyap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lyap"))
        .args(args)
        .env_remove("LYAP_THREADS")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn error_kind(out: &Output) -> String {
    let v: Value = serde_json::from_slice(&out.stderr).expect("stderr is a JSON error object");
    v["error"]["kind"].as_str().unwrap().to_string()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn gamma_two_points() {
    let out = lyap(&["gamma", "--t", "1", "--x", "0,0.5", "--m", "1,1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    for key in ["gamma1", "gamma2", "gamma3"] {
        assert_eq!(v[key].as_f64().unwrap(), -0.0625);
    }
    assert_eq!(v["partition"], serde_json::json!([[1, 2]]));
    assert_eq!(v["structure_ok"], Value::Bool(true));
}

#[test]
fn gamma_single_point_is_zero() {
    let out = lyap(&["gamma", "--t", "1", "--x", "0", "--m", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["gamma3"].as_f64().unwrap(), 0.0);
}

#[test]
fn invalid_instances_exit_one() {
    let out = lyap(&["gamma", "--t", "-1", "--x", "0", "--m", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(error_kind(&out), "NonPositiveTime");
    assert!(out.stdout.is_empty());

    let out = lyap(&["gamma", "--t", "1", "--x", "1,0", "--m", "1,1"]);
    assert_eq!(
        (out.status.code(), error_kind(&out).as_str()),
        (Some(1), "UnsortedLocations")
    );

    let out = lyap(&["gamma", "--t", "1", "--x", "0,1", "--m", "1,0"]);
    assert_eq!(error_kind(&out), "NonPositiveMultiplicity");

    let out = lyap(&["gamma", "--t", "1", "--x", "0,1", "--m", "1"]);
    assert_eq!(error_kind(&out), "LengthMismatch");

    let out = lyap(&["gamma", "--t", "1", "--x", "0"]);
    assert_eq!(
        (out.status.code(), error_kind(&out).as_str()),
        (Some(1), "InvalidArguments")
    );

    let out = lyap(&["frobnicate"]);
    assert_eq!(
        (out.status.code(), error_kind(&out).as_str()),
        (Some(1), "InvalidArguments")
    );
}

#[test]
fn negative_locations_parse() {
    let out = lyap(&["gamma", "--t", "1", "--x", "-1,0", "--m", "1,1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["gamma3"].as_f64().unwrap(), -0.5);
}

#[test]
fn input_file_and_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("inst.json");
    let output = dir.path().join("report.json");
    fs::write(&input, r#"{"t": 1, "x": [0, 2], "m": [1, 1]}"#).unwrap();
    let out = lyap(&[
        "gamma",
        "--input",
        input.to_str().unwrap(),
        "--output",
        output.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&fs::read_to_string(&output).unwrap()).unwrap();
    assert_eq!(v["gamma3"].as_f64().unwrap(), -2.0);
    assert_eq!(v["partition"], serde_json::json!([[1], [2]]));

    fs::write(&input, r#"{"t": 1, "x": [0], "m": [1.5]}"#).unwrap();
    let out = lyap(&["gamma", "--input", input.to_str().unwrap()]);
    assert_eq!(
        (out.status.code(), error_kind(&out).as_str()),
        (Some(1), "InvalidJson")
    );

    fs::write(&input, r#"{"t": 0, "x": [0], "m": [1]}"#).unwrap();
    let out = lyap(&["gamma", "--input", input.to_str().unwrap()]);
    assert_eq!(error_kind(&out), "NonPositiveTime");

    let out = lyap(&["gamma", "--input", input.to_str().unwrap(), "--t", "1"]);
    assert_eq!(error_kind(&out), "InvalidArguments");
}

#[test]
fn unwritable_output_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("missing").join("out.csv");
    let out = lyap(&[
        "clusters",
        "--t",
        "1",
        "--x",
        "0,2",
        "--m",
        "1,1",
        "--output",
        target.to_str().unwrap(),
    ]);
    assert_eq!(
        (out.status.code(), error_kind(&out).as_str()),
        (Some(1), "Io")
    );
}

#[test]
fn report_json_is_idempotent() {
    let out = lyap(&["gamma", "--t", "2.3", "--x", "-1.1,0.4,0.7", "--m", "2,1,3"]);
    let text = stdout(&out);
    let v: Value = serde_json::from_str(&text).unwrap();
    let again: lyap_core::GammaReport = serde_json::from_value(v.clone()).unwrap();
    assert_eq!(serde_json::to_value(&again).unwrap(), v);

    // file and inline input give byte-identical output
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("inst.json");
    fs::write(
        &input,
        r#"{"t": 2.3, "x": [-1.1, 0.4, 0.7], "m": [2, 1, 3]}"#,
    )
    .unwrap();
    let from_file = lyap(&["gamma", "--input", input.to_str().unwrap()]);
    assert_eq!(stdout(&from_file), text);
}

#[test]
fn floats_carry_seventeen_digits() {
    let out = lyap(&["gamma", "--t", "0.7", "--x", "0.1", "--m", "3"]);
    let text = stdout(&out);
    assert!(text.contains("\"gamma3\":0.67857142857142838"), "{text}");
}

#[test]
fn clusters_two_blocks() {
    let out = lyap(&[
        "clusters",
        "--t",
        "1",
        "--x",
        "0,0.3,0.6,3.6,3.9",
        "--m",
        "1,1,1,1,1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["partition"], serde_json::json!([[1, 2, 3], [4, 5]]));
    assert_eq!(v["cluster_masses"], serde_json::json!([3, 2]));
    assert_eq!(v["events"].as_array().unwrap().len(), 2);
}

#[test]
fn clusters_csv_straight_lines() {
    let out = lyap(&[
        "clusters", "--format", "csv", "--t", "1", "--x", "0,2", "--m", "1,1",
    ]);
    assert_eq!(
        stdout(&out),
        "i,s,zeta,xi\n1,0,0,0\n1,1,0.5,0\n2,0,2,2\n2,1,1.5,0\n"
    );

    let out = lyap(&[
        "clusters", "--format", "csv", "--t", "1", "--x", "0", "--m", "4",
    ]);
    assert_eq!(stdout(&out), "i,s,zeta,xi\n1,0,0,0\n1,1,0,0\n");
}

#[test]
fn verify_runs_and_filters() {
    let out = lyap(&["verify", "--seed", "0", "--count", "60"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["ok"], Value::Bool(true));
    assert_eq!(v["suites"].as_array().unwrap().len(), 6);

    let out = lyap(&[
        "verify",
        "--suites",
        "quadrature",
        "--count",
        "5",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        stdout(&out),
        "suite,checked,passed,skipped,failed\nquadrature,5,5,0,0\n"
    );

    let out = lyap(&["verify", "--count", "0"]);
    assert_eq!(out.status.code(), Some(0));

    let out = lyap(&["verify", "--suites", "bogus"]);
    assert_eq!(error_kind(&out), "InvalidArguments");
}

#[test]
fn moments_single_factor() {
    let out = lyap(&["moments", "--T", "10", "--t", "1", "--x", "0", "--m", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let moment = v["moment"].as_f64().unwrap();
    assert!(((moment - 1.088_896_407_032_121_4) / moment).abs() < 1e-10);
    assert_eq!(v["gamma"].as_f64().unwrap(), 0.25);
    let (rate, gap) = (v["rate"].as_f64().unwrap(), v["gap"].as_f64().unwrap());
    assert!((gap - (0.25 - rate)).abs() < 1e-15);
    assert!(v["imag_residual"].as_f64().unwrap() <= 1e-8);
}

#[test]
fn moments_flags_and_errors() {
    let out = lyap(&[
        "moments",
        "--T",
        "4",
        "--t",
        "1",
        "--x",
        "0",
        "--m",
        "1",
        "--rule",
        "trapezoid",
        "--points",
        "401",
        "--offsets",
        "0.2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let moment = json(&out)["moment"].as_f64().unwrap();
    let exact = 1.0 / (2.0 * std::f64::consts::PI * 4.0f64).sqrt();
    assert!(((moment - exact) / exact).abs() < 1e-8);

    let out = lyap(&["moments", "--T", "4", "--t", "1", "--x", "0", "--m", "4"]);
    assert_eq!(error_kind(&out), "NuTooLarge");
    let out = lyap(&[
        "moments",
        "--T",
        "4",
        "--t",
        "1",
        "--x",
        "0",
        "--m",
        "2",
        "--offsets",
        "0,-0.5",
    ]);
    assert_eq!(error_kind(&out), "InvalidContour");
    let out = lyap(&["moments", "--T", "0", "--t", "1", "--x", "0", "--m", "1"]);
    assert_eq!(error_kind(&out), "NonPositiveTime");
    let out = lyap(&[
        "gamma", "--format", "csv", "--t", "1", "--x", "0", "--m", "1",
    ]);
    assert_eq!(error_kind(&out), "InvalidArguments");
}

#[test]
fn sweep_location_crosses_branches_continuously() {
    let out = lyap(&[
        "sweep", "--t", "1", "--x", "0,0.5", "--m", "1,1", "--vary", "x2", "--from", "0.1", "--to",
        "3", "--steps", "30",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let rows: Vec<Vec<&str>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').collect())
        .collect();
    assert_eq!(rows.len(), 30);
    for r in &rows {
        let d: f64 = r[0].parse().unwrap();
        let g: f64 = r[1].parse().unwrap();
        let q: usize = r[2].parse().unwrap();
        let merged = 0.25 - d / 2.0 - d * d / 4.0;
        let separate = -d * d / 2.0;
        let (want_q, want_g) = if d <= 1.0 { (1, merged) } else { (2, separate) };
        assert_eq!(q, want_q, "x2 = {d}");
        assert!((g - want_g).abs() < 1e-12, "x2 = {d}: {g} vs {want_g}");
    }
}

#[test]
fn sweep_time_switches_block_count() {
    let out = lyap(&[
        "sweep", "--t", "1", "--x", "0,1", "--m", "1,1", "--vary", "t", "--from", "0.1", "--to",
        "4", "--steps", "40",
    ]);
    let text = stdout(&out);
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        let t: f64 = f[0].parse().unwrap();
        let q: usize = f[2].parse().unwrap();
        assert_eq!(q, if t >= 1.0 { 1 } else { 2 }, "t = {t}");
        assert_eq!(f[3].is_empty(), t < 1.0);
    }
}

#[test]
fn sweep_edge_cases() {
    let out = lyap(&[
        "sweep", "--t", "1", "--x", "0,1", "--m", "1,1", "--vary", "t", "--from", "0.1", "--to",
        "4", "--steps", "0",
    ]);
    assert_eq!(
        (out.status.code(), stdout(&out)),
        (Some(0), "param,gamma,q_hat,s0\n".to_string())
    );

    let out = lyap(&[
        "sweep", "--t", "1", "--x", "0,1", "--m", "1,1", "--vary", "x3", "--from", "0", "--to",
        "1", "--steps", "3",
    ]);
    assert_eq!(
        (out.status.code(), error_kind(&out).as_str()),
        (Some(1), "MalformedGrid")
    );

    let out = lyap(&[
        "sweep", "--t", "1", "--x", "0,1", "--m", "1,1", "--vary", "t", "--from", "-1", "--to",
        "1", "--steps", "3",
    ]);
    assert_eq!(
        (out.status.code(), error_kind(&out).as_str()),
        (Some(1), "NonPositiveTime")
    );

    let out = lyap(&[
        "sweep", "--vary", "t", "--from", "1", "--to", "2", "--steps", "3", "--seed", "5",
        "--format", "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out).as_array().unwrap().len(), 3);
}

#[test]
fn output_is_deterministic_across_thread_counts() {
    let args = ["verify", "--count", "30", "--seed", "9"];
    let one = Command::new(env!("CARGO_BIN_EXE_lyap"))
        .args(args)
        .env("LYAP_THREADS", "1")
        .output()
        .unwrap();
    let four = Command::new(env!("CARGO_BIN_EXE_lyap"))
        .args(args)
        .env("LYAP_THREADS", "4")
        .output()
        .unwrap();
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(one.stdout, lyap(&args).stdout);

    let moments = [
        "moments", "--T", "5", "--t", "1", "--x", "0,0.4", "--m", "1,1",
    ];
    let a = Command::new(env!("CARGO_BIN_EXE_lyap"))
        .args(moments)
        .env("LYAP_THREADS", "1")
        .output()
        .unwrap();
    let b = Command::new(env!("CARGO_BIN_EXE_lyap"))
        .args(moments)
        .env("LYAP_THREADS", "3")
        .output()
        .unwrap();
    assert_eq!(a.stdout, b.stdout);

    let bad = Command::new(env!("CARGO_BIN_EXE_lyap"))
        .args(args)
        .env("LYAP_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
}
