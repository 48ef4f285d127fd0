//! End-to-end tests of the `dynamo` binary: exit codes, config diagnostics,
//! output artifacts, determinism of repeated runs, and the self-consistency
//! of the reported rates against the emitted CSV.

use dynamo_core::spectral::{l2_norm, read_checkpoint};
use std::path::Path;
use std::process::{Command, Output};

fn dynamo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dynamo"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, json: &str) -> String {
    let path = dir.join("config.json");
    std::fs::write(&path, json).unwrap();
    path.to_string_lossy().into_owned()
}

/// Small fast setup: coarse grid, base frequency 2, an explicit rate budget
/// so the schedule is short. The flow cannot actually sustain that budget,
/// which the growth check is expected to report.
const TOY: &str = r#"{
    "grid": [12, 12, 4], "delta": 0.2, "n0": 2, "n": 1,
    "eps": "auto", "lambda_hat": 0.5, "eta": 0.1, "sample_every": 4
}"#;

#[test]
fn missing_config_file_is_reported_as_such() {
    let out = dynamo(&["alpha", "--config", "/nonexistent/config.json"]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("cannot be read"), "stderr: {err}");
}

#[test]
fn unknown_key_malformed_and_invalid_value_are_distinct() {
    let dir = tempfile::tempdir().unwrap();

    let path = write_config(dir.path(), r#"{"detla": 0.2}"#);
    let out = dynamo(&["alpha", "--config", &path]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("unrecognized key"), "stderr: {err}");

    let path = write_config(dir.path(), r#"{"delta": 0.2,"#);
    let out = dynamo(&["alpha", "--config", &path]);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("not valid JSON"), "stderr: {err}");

    let path = write_config(dir.path(), r#"{"delta": 1.5}"#);
    let out = dynamo(&["alpha", "--config", &path]);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("invalid value"), "stderr: {err}");
}

#[test]
fn alpha_and_schedule_succeed_on_the_toy_config() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), TOY);

    let out_a = dir.path().join("alpha");
    let out = dynamo(&["alpha", "--config", &path, "--out", out_a.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_a.join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["command"], "alpha");
    assert_eq!(summary["pass"], true);

    let out_s = dir.path().join("sched");
    let out = dynamo(&["schedule", "--config", &path, "--out", out_s.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out_s.join("schedule.json").exists());
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_s.join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["schedule"]["segments"], 3);
}

#[test]
fn schedule_refuses_a_nonpositive_measured_rate() {
    let dir = tempfile::tempdir().unwrap();
    // At offset 1/2 the leading Bloch rate is negative, so "measure" must
    // make the command refuse instead of building a schedule that cannot
    // certify growth. Truncation 2 keeps the eigensolve fast.
    let path = write_config(
        dir.path(),
        r#"{"grid": [12, 12, 4], "delta": 0.2, "n0": 2, "n": 1,
            "lambda_hat": "measure", "k_trunc": 2}"#,
    );
    let out = dynamo(&["schedule", "--config", &path]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("refusing"), "stderr: {err}");
}

#[test]
fn simulate_reports_the_phases_and_fails_honestly_on_the_toy_budget() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), TOY);
    let out_dir = dir.path().join("sim");
    let out = dynamo(&["simulate", "--config", &path, "--out", out_dir.to_str().unwrap()]);
    // The decay and generation phases pass; the fictitious rate budget of
    // 0.5 is far beyond what the flow delivers, so the growth check fails
    // and the exit code reflects it.
    assert!(!out.status.success());

    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("summary.json")).unwrap())
            .unwrap();
    let interval = &summary["simulate"]["intervals"][0];
    assert_eq!(interval["decay_pass"], true);
    assert_eq!(interval["generation_pass"], true);
    assert_eq!(interval["growth_pass"], false);
    assert_eq!(summary["pass"], false);

    // The checkpoint at t_1 reads back as a finite, normalized-scale field.
    let t1 = summary["simulate"]["checkpoint_times"][0].as_f64().unwrap();
    let state = out_dir.join(format!("state_{t1:.3}.kde1"));
    let field = read_checkpoint(&state).unwrap();
    let norm = l2_norm(&field);
    assert!(norm.is_finite() && norm > 0.5 && norm < 2.0, "norm {norm}");

    // A corrupted checkpoint is rejected rather than misread.
    let mut bytes = std::fs::read(&state).unwrap();
    bytes[0] ^= 0xff;
    let bad = out_dir.join("bad.kde1");
    std::fs::write(&bad, bytes).unwrap();
    assert!(read_checkpoint(&bad).is_err());
}

#[test]
fn repeated_simulate_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), TOY);
    let out_dir = dir.path().join("sim");
    let args = ["simulate", "--config", path.as_str(), "--out"];

    dynamo(&[&args[..], &[out_dir.to_str().unwrap()]].concat());
    let energy1 = std::fs::read(out_dir.join("energy.csv")).unwrap();
    let summary1 = std::fs::read(out_dir.join("summary.json")).unwrap();
    let schedule1 = std::fs::read(out_dir.join("schedule.json")).unwrap();

    dynamo(&[&args[..], &[out_dir.to_str().unwrap()]].concat());
    assert_eq!(energy1, std::fs::read(out_dir.join("energy.csv")).unwrap());
    assert_eq!(summary1, std::fs::read(out_dir.join("summary.json")).unwrap());
    assert_eq!(schedule1, std::fs::read(out_dir.join("schedule.json")).unwrap());
}

#[test]
fn reported_normalized_rate_matches_the_emitted_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), TOY);
    let out_dir = dir.path().join("sim");
    dynamo(&["simulate", "--config", &path, "--out", out_dir.to_str().unwrap()]);

    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("summary.json")).unwrap())
            .unwrap();
    let reported = summary["simulate"]["gamma_bar_hat"].as_f64().unwrap();
    let times: Vec<f64> = summary["simulate"]["checkpoint_times"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();

    let csv = std::fs::read_to_string(out_dir.join("energy.csv")).unwrap();
    let samples: Vec<(f64, f64)> = csv
        .lines()
        .skip(1)
        .map(|line| {
            let mut it = line.split(',');
            let t: f64 = it.next().unwrap().parse().unwrap();
            let norm: f64 = it.next().unwrap().parse().unwrap();
            (t, norm)
        })
        .collect();
    let norm0 = samples[0].1;
    let recomputed = times
        .iter()
        .map(|&tk| {
            let (_, norm) = samples
                .iter()
                .min_by(|a, b| (a.0 - tk).abs().total_cmp(&(b.0 - tk).abs()))
                .unwrap();
            (norm / norm0).ln() / tk
        })
        .fold(f64::NEG_INFINITY, f64::max);
    assert!(
        (reported - recomputed).abs() <= 1e-12,
        "reported {reported}, from csv {recomputed}"
    );
}

#[test]
fn verify_exits_zero_and_writes_a_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dynamo(&["verify", "--out", dir.path().to_str().unwrap(), "--seed", "7"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["pass"], true);
    assert!(summary["checks"].as_array().unwrap().len() >= 15);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.lines().any(|l| l.starts_with("ok")), "stdout: {stdout}");
}
