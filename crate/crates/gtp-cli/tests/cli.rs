//! End-to-end tests of the `gtp` binary: exit codes, output schemas, and
//! byte-level reproducibility across separate process invocations.

use std::process::{Command, Output};

fn gtp(args: &[&str]) -> Output {
    gtp_with_env(args, &[])
}

fn gtp_with_env(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut command = Command::new(env!("CARGO_BIN_EXE_gtp"));
    // Isolate from any ambient seed so tests control it explicitly.
    command.env_remove("GTP_SEED");
    for (key, value) in envs {
        command.env(key, value);
    }
    command.args(args).output().expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("utf-8 stdout")
}

fn stderr(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).expect("utf-8 stderr")
}

fn json(output: &Output) -> serde_json::Value {
    serde_json::from_str(&stdout(output)).expect("stdout is JSON")
}

#[test]
fn verify_passes_and_both_runs_are_byte_identical() {
    let args = ["verify", "--grid", "coarse", "--samples", "300", "--seed", "9"];
    let first = gtp(&args);
    let second = gtp(&args);
    assert!(first.status.success(), "stderr: {}", stderr(&first));
    assert_eq!(first.stdout, second.stdout);
    let text = stdout(&first);
    assert_eq!(text.matches("PASS criterion").count(), 12);
    assert!(text.contains("12/12 criteria passed"));
}

#[test]
fn verify_emits_json_when_asked() {
    let out = gtp(&[
        "verify", "--grid", "coarse", "--samples", "300", "--json",
    ]);
    assert!(out.status.success());
    let value = json(&out);
    assert_eq!(value["all_passed"], serde_json::Value::Bool(true));
    assert_eq!(value["criteria"].as_array().unwrap().len(), 12);
}

#[test]
fn corrupted_tolerances_exit_with_one() {
    let out = gtp(&[
        "verify",
        "--grid",
        "coarse",
        "--samples",
        "300",
        "--corrupt-tolerances",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("FAIL criterion"));
}

#[test]
fn invalid_parameters_exit_with_two() {
    let out = gtp(&["run", "--n", "1.5", "--m", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).starts_with("error:"));

    let bad_env = gtp_with_env(&["run", "--n", "0.5", "--m", "0.5"], &[("GTP_SEED", "x")]);
    assert_eq!(bad_env.status.code(), Some(2));
}

#[test]
fn deterministic_perfect_run_reports_unit_quantities() {
    let out = gtp(&["run", "--n", "1.0", "--m", "1.0", "--input", "ket:0"]);
    assert!(out.status.success());
    let value = json(&out);
    assert_eq!(value["params"]["mode"], "deterministic");
    assert!((value["p_suc"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!((value["c_pro"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn exact_matched_run_reports_unit_fidelity_and_known_success_rate() {
    let out = gtp(&[
        "run", "--n", "0.5", "--m", "0.5", "--acceptance", "pqt", "--exact",
    ]);
    assert!(out.status.success());
    let value = json(&out);
    assert_eq!(value["params"]["mode"], "exact");
    assert!((value["f_pro"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!((value["p_suc"].as_f64().unwrap() - 0.32).abs() < 1e-12);
}

#[test]
fn monte_carlo_runs_are_byte_identical_for_a_fixed_seed() {
    let args = [
        "run", "--n", "0.6", "--m", "0.9", "--samples", "500", "--seed", "21",
    ];
    let first = gtp(&args);
    let second = gtp(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(json(&first)["params"]["seed"], 21);
}

#[test]
fn environment_seed_is_used_and_flag_overrides_it() {
    let env_run = gtp_with_env(
        &["run", "--n", "0.5", "--m", "0.5", "--samples", "300"],
        &[("GTP_SEED", "33")],
    );
    assert_eq!(json(&env_run)["params"]["seed"], 33);

    let flag_run = gtp_with_env(
        &["run", "--n", "0.5", "--m", "0.5", "--samples", "300", "--seed", "44"],
        &[("GTP_SEED", "33")],
    );
    assert_eq!(json(&flag_run)["params"]["seed"], 44);
}

#[test]
fn config_file_drives_runs_and_flags_win_on_conflict() {
    let dir = std::env::temp_dir().join(format!("gtp-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("run.json");
    std::fs::write(
        &path,
        r#"{"n": [0.5], "m": [0.5], "acceptance": "pqt", "samples": 300, "seed": 5}"#,
    )
    .unwrap();
    let path_str = path.to_str().unwrap();

    let from_file = gtp(&["run", "--config", path_str]);
    assert!(from_file.status.success());
    assert_eq!(json(&from_file)["params"]["seed"], 5);

    let overridden = gtp(&["run", "--config", path_str, "--seed", "12"]);
    assert_eq!(json(&overridden)["params"]["seed"], 12);

    std::fs::remove_file(&path).unwrap();
}

#[test]
fn sweep_emits_the_documented_csv_deterministically() {
    let first = gtp(&["sweep"]);
    let second = gtp(&["sweep"]);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
    let text = stdout(&first);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "n,delta,f_pqt,p_suc,c_pqt");
    assert_eq!(text.lines().count(), 423);
    assert!(stderr(&first).contains("warning: skipping"));
    assert!(text.ends_with('\n'));
    assert!(!text.contains('\r'));
}

#[test]
fn sweep_writes_csv_to_a_file_with_out() {
    let dir = std::env::temp_dir().join(format!("gtp-cli-sweep-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("sweep.csv");
    let out = gtp(&[
        "sweep",
        "--n-grid",
        "0.5:0.5:0.1",
        "--delta-grid",
        "-0.1:0.1:0.1",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    assert!(written.starts_with("n,delta,f_pqt,p_suc,c_pqt\n"));
    assert_eq!(written.lines().count(), 4);
    std::fs::remove_file(&path).unwrap();
}

#[test]
fn bad_sweep_grids_exit_with_two() {
    let out = gtp(&["sweep", "--n-grid", "0.5:0.1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = gtp(&["sweep", "--n-grid", "0.1:0.5:-0.1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn optimizer_finds_the_known_maximum() {
    let out = gtp(&["optimize", "--n", "0.9"]);
    assert!(out.status.success());
    let value = json(&out);
    assert!((value["m_star"].as_f64().unwrap() - 1.0).abs() <= 0.005);
    let c = 2.0 * 0.9 / (1.0 + 0.81);
    let expected = (2.0 / 3.0) * (1.0 + c / 2.0);
    assert!((value["c_channel"].as_f64().unwrap() - expected).abs() < 1e-4);
    assert_eq!(value["degenerate"], serde_json::Value::Bool(false));
}

#[test]
fn multi_channel_optimizer_reports_each_channel() {
    let out = gtp(&["optimize", "--n", "0.5", "--n2", "0.8"]);
    assert!(out.status.success());
    let value = json(&out);
    assert_eq!(value["channels"].as_array().unwrap().len(), 2);
    assert!(value["c_channel"].as_f64().unwrap() <= 1.0);
}
