use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_precision-atlas"));
    c.env_remove("PRECISION_ATLAS_MAX_N");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json_of(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().expect("exit code")
}

#[test]
fn bound_examples() {
    let v = json_of(&["bound", "--n", "8"]);
    assert_eq!(v["command"], "bound");
    assert_eq!(v["results"]["bound"], 25);
    assert_eq!(json_of(&["bound", "--n", "4"])["results"]["bound"], 9);
    assert_eq!(json_of(&["bound", "--n", "5", "--identical"])["results"]["bound"], 6);
}

#[test]
fn spectrum_saturates_bound() {
    let v = json_of(&["spectrum", "--n", "6"]);
    assert_eq!(v["results"]["distinct_eigenvalues"], 16);
    assert_eq!(v["results"]["saturated"], true);
}

#[test]
fn irreducibility_n5() {
    let v = json_of(&["irreducibility", "--n", "5"]);
    let reports = v["results"]["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 12);
    assert!(reports.iter().all(|r| r["commutant_dim"] == 1));
}

#[test]
fn table2_qpea_row() {
    let v = json_of(&["table2", "--qpea-qubits", "8", "--sql-n", "64"]);
    let rows = v["results"]["rows"].as_array().unwrap();
    let names: Vec<&str> = rows.iter().map(|r| r["strategy"].as_str().unwrap()).collect();
    assert_eq!(names, ["sql", "qpea", "qmetrology"]);
    let mi = &rows[1]["mutual_info"];
    let closed = 256f64.ln() - 2.0 * (1.0 - 0.577_215_664_901_532_9);
    assert!((mi["closed_form"].as_f64().unwrap() - closed).abs() < 1e-10);
    assert!((mi["numeric"].as_f64().unwrap() - closed).abs() <= 0.01);
}

#[test]
fn table2_accepts_all_three_model_params() {
    let v = json_of(&["table2", "--qpea-qubits", "10", "--sql-n", "1024", "--nu", "100"]);
    assert_eq!(v["params"]["qpea_qubits"], 10);
    assert_eq!(v["params"]["sql_n"], 1024);
    assert_eq!(v["params"]["nu"], 100);
}

#[test]
fn protocol_two_level() {
    let v = json_of(&["protocol", "--m", "2", "--phi", "1.5707963267948966"]);
    let probs = v["results"]["run"]["outcome_probs"].as_array().unwrap();
    assert!((probs[0].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert_eq!(v["results"]["precision_relative"], 0.5);
    let spin = json_of(&["protocol", "--spin-n", "4", "--phi", "0"]);
    assert_eq!(spin["results"]["m"], 9);
}

#[test]
fn model_metrics_qpea() {
    let v = json_of(&["model-metrics", "--model", "qpea", "--size", "4"]);
    let r = &v["results"]["report"];
    assert_eq!(r["m_outcomes"], 16);
    assert_eq!(r["delta"], 0.0625);
    assert!(r["mutual_info"].as_f64().unwrap() <= 16f64.ln());
    assert!(r["asymptotic"].is_object());
}

#[test]
fn fig1_panel_a_csv() {
    let out = run(&["fig1", "--panel", "a", "--points", "4", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.split("\r\n").collect();
    assert_eq!(lines[0], "phi,P_minus,P_plus");
    assert_eq!(lines[1], "0,0,1");
    assert_eq!(lines[2], "1.57079632679,0.5,0.5");
    assert_eq!(lines.len(), 6);
}

#[test]
fn fig1_panels_b_and_c_have_one_series_per_outcome() {
    let b = json_of(&["fig1", "--panel", "b", "--n", "5", "--points", "10"]);
    assert_eq!(b["results"]["series"].as_array().unwrap().len(), 6);
    let c = json_of(&["fig1", "--panel", "c", "--qubits", "2", "--points", "10"]);
    let series = c["results"]["series"].as_array().unwrap();
    assert_eq!(series.len(), 4);
    for i in 0..10 {
        let total: f64 = series.iter().map(|s| s["values"][i].as_f64().unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-10);
    }
}

#[test]
fn exit_code_matrix() {
    let cases: &[(&[&str], i32)] = &[
        (&["bound", "--n", "3"], 0),
        (&["spectrum", "--n", "3", "--format", "csv"], 0),
        (&["--help"], 0),
        (&[], 2),
        (&["frobnicate"], 2),
        (&["bound"], 2),
        (&["bound", "--n", "x"], 2),
        (&["bound", "--n", "0"], 2),
        (&["spectrum", "--n", "99"], 2),
        (&["irreducibility", "--n", "8"], 2),
        (&["model-metrics", "--model", "binomial"], 2),
        (&["model-metrics", "--model", "binomial", "--size", "4", "--nodes", "8"], 2),
        (&["protocol", "--m", "4", "--phi", "7"], 2),
        (&["protocol", "--m", "4", "--spin-n", "3", "--phi", "1"], 2),
        (&["fig1", "--panel", "d"], 2),
        (&["bound", "--n", "3", "--format", "xml"], 2),
        // passes validation, rejected by the computation
        (&["spectrum", "--n", "13", "--allow-large"], 1),
        (&["model-metrics", "--model", "qpea", "--size", "40"], 1),
        (&["protocol", "--spin-n", "1", "--phi", "1"], 0),
        (&["bound", "--n", "3", "--output", "/nonexistent-dir/out.json"], 1),
    ];
    for (args, expected) in cases {
        assert_eq!(code(args), *expected, "{args:?}");
    }
}

#[test]
fn computation_errors_are_machine_readable() {
    let out = run(&["spectrum", "--n", "13", "--allow-large"]);
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&out.stderr).expect("JSON error record");
    assert_eq!(err["error"]["kind"], "computation");
    assert_eq!(err["error"]["command"], "spectrum");
}

#[test]
fn env_var_overrides_cap() {
    let out = bin().args(["spectrum", "--n", "4"]).env("PRECISION_ATLAS_MAX_N", "3").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(code(&["protocol", "--spin-n", "9", "--phi", "1"]), 2);
    let out = bin().args(["protocol", "--spin-n", "9", "--phi", "1"]).env("PRECISION_ATLAS_MAX_N", "9").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let out = bin().args(["bound", "--n", "4"]).env("PRECISION_ATLAS_MAX_N", "lots").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn output_file_is_written() {
    let path = std::env::temp_dir().join(format!("precision-atlas-test-{}.json", std::process::id()));
    let out = run(&["bound", "--n", "6", "--output", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["results"]["bound"], 16);
    std::fs::remove_file(path).ok();
}

#[test]
fn json_round_trips_for_every_command() {
    let commands: &[&[&str]] = &[
        &["bound", "--n", "4"],
        &["spectrum", "--n", "5"],
        &["irreducibility", "--n", "3"],
        &["model-metrics", "--model", "single-shot"],
        &["model-metrics", "--model", "deterministic", "--size", "5"],
        &["model-metrics", "--model", "qmetrology-batch", "--size", "10"],
        &["protocol", "--m", "8", "--phi", "1", "--shots", "100", "--seed", "3"],
        &["table2", "--qpea-qubits", "4", "--sql-n", "16", "--nu", "10"],
        &["fig1", "--panel", "c", "--points", "16"],
    ];
    for args in commands {
        let out = run(args);
        assert!(out.status.success(), "{args:?}");
        let text = String::from_utf8(out.stdout).unwrap();
        let v: Value = serde_json::from_str(&text).unwrap();
        for key in ["command", "version", "timestamp", "params", "results", "tolerances"] {
            assert!(v.get(key).is_some(), "{args:?} lacks {key}");
        }
        assert_eq!(serde_json::to_string_pretty(&v).unwrap() + "\n", text, "{args:?}");
    }
}

#[test]
fn same_seed_gives_identical_payload() {
    let args = ["protocol", "--m", "8", "--phi", "2.2", "--shots", "5000", "--seed", "42"];
    let strip = |mut v: Value| {
        v.as_object_mut().unwrap().remove("timestamp");
        serde_json::to_string(&v).unwrap()
    };
    let a = strip(json_of(&args));
    let b = strip(json_of(&args));
    assert_eq!(a, b);
    let c = strip(json_of(&["protocol", "--m", "8", "--phi", "2.2", "--shots", "5000", "--seed", "43"]));
    assert_ne!(a, c);
}
