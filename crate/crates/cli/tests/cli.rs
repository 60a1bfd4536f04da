//! End-to-end tests of the `sparsebound` binary: subcommand output,
//! config handling, exit codes, and report reproducibility.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sparsebound"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(output: &Output) -> serde_json::Value {
    assert!(
        output.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    serde_json::from_slice(&output.stdout).expect("stdout is JSON")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

const GT_CONFIG: &str = r#"{
  "schema_version": 1,
  "dims": {"n": 8, "k": 2},
  "model": {"type": "group_testing", "crossover": 0.0},
  "strategy": {"type": "bernoulli", "p": 0.5},
  "decoder": "ml",
  "t": 5,
  "trials": 200,
  "seed": 9,
  "revealed_size": 0,
  "mi_estimation": {"type": "exact"},
  "bound_form": "finite-fano"
}"#;

#[test]
fn bound_group_testing_matches_log2_binomial() {
    let out = run(&[
        "bound",
        "--model",
        "group-testing",
        "--n",
        "8",
        "--k",
        "2",
        "--form",
        "asymptotic",
        "--units",
        "bits",
    ]);
    let v = stdout_json(&out);
    let overall = v["bound"]["overall"].as_f64().unwrap();
    assert!((overall - 28.0f64.log2()).abs() < 1e-9);
    assert_eq!(v["bound"]["units"], "bits");
}

#[test]
fn bound_linear_cs_requires_snr() {
    let out = run(&["bound", "--model", "linear-cs", "--n", "16", "--k", "2"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn simulate_emits_report_and_csv_reproducibly() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "config.json", GT_CONFIG);
    let out_a = dir.path().join("a.json");
    let out_b = dir.path().join("b.json");
    let csv = dir.path().join("rows.csv");

    for out in [&out_a, &out_b] {
        let result = run(&[
            "simulate",
            "--config",
            &config,
            "--out",
            out.to_str().unwrap(),
            "--csv",
            csv.to_str().unwrap(),
        ]);
        assert!(result.status.success());
    }
    let a: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_a).unwrap()).unwrap();
    let b: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_b).unwrap()).unwrap();
    // Identical modulo the wall-time field.
    let strip = |mut v: serde_json::Value| {
        v["meta"]
            .as_object_mut()
            .unwrap()
            .remove("wall_time_ms");
        v
    };
    assert_eq!(strip(a.clone()), strip(b));

    let row = &a["rows"][0];
    assert_eq!(row["trials"], 200);
    assert!(row["error_count"].as_u64().unwrap() <= 200);
    let csv_text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(csv_text.lines().count(), 2);
    assert!(csv_text.starts_with("t,snr,trials"));
}

#[test]
fn simulate_rejects_unknown_fields_with_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let bad = GT_CONFIG.replace("\"seed\": 9,", "\"seed\": 9, \"mystery\": true,");
    let config = write_config(dir.path(), "bad.json", &bad);
    let out = run(&["simulate", "--config", &config]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn simulate_resource_cap_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    // C(64, 8) > 1e7: the exhaustive decoder's cap rejects it.
    let big = GT_CONFIG
        .replace("\"n\": 8", "\"n\": 64")
        .replace("\"k\": 2", "\"k\": 8");
    let config = write_config(dir.path(), "big.json", &big);
    let out = run(&["simulate", "--config", &config]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_runs_grid_and_tags_feasibility() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "sweep.json",
        r#"{
  "schema_version": 1,
  "dims": {"n": 8, "k": 2},
  "model": {"type": "linear_cs", "snr": 2.0},
  "strategy": {"type": "gaussian"},
  "decoder": "ml",
  "t": 6,
  "snr_sweep": [0.5, 4.0],
  "trials": 50,
  "seed": 3,
  "revealed_size": 0,
  "mi_estimation": {"type": "closed_form"},
  "bound_form": "finite-fano"
}"#,
    );
    let out = run(&["sweep", "--config", &config]);
    let v = stdout_json(&out);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    for row in rows {
        assert!(row["cs_feasibility"]["feasible"].is_boolean());
        assert!(row["snr"].is_number());
    }
}

#[test]
fn gap_of_identical_configs_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "config.json", GT_CONFIG);
    let out = run(&["gap", "--baseline", &config, "--adaptive", &config]);
    let v = stdout_json(&out);
    assert_eq!(v["pe_gap"].as_f64().unwrap(), 0.0);
}

#[test]
fn mi_exact_reference_value() {
    let out = run(&[
        "mi",
        "--model",
        "group-testing",
        "--k",
        "2",
        "--p",
        "0.5",
    ]);
    let v = stdout_json(&out);
    let value = v["estimate"]["value"].as_f64().unwrap();
    assert!((value - 0.5623351446188083).abs() < 1e-12);
}

#[test]
fn verify_twice_is_byte_identical_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("verify_a.json");
    let b = dir.path().join("verify_b.json");
    for path in [&a, &b] {
        let out = run(&["verify", "--out", path.to_str().unwrap()]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "stderr: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let bytes_a = std::fs::read(&a).unwrap();
    let bytes_b = std::fs::read(&b).unwrap();
    assert_eq!(bytes_a, bytes_b, "verify reports must be byte-identical");
    let report: serde_json::Value = serde_json::from_slice(&bytes_a).unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["criteria"].as_array().unwrap().len(), 10);
}
