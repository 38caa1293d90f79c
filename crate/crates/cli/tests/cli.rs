use std::process::Command;

use serde_json::Value;

fn verify() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_verify"));
    cmd.env_remove("VERIFY_THREADS");
    cmd
}

fn read_report(path: &std::path::Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn group_run_writes_passing_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("group.json");
    let status = verify()
        .args(["group", "--n", "4", "--q", "2", "--c", "2", "--samples", "40", "--seed", "7", "--quiet"])
        .arg("--output")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let report = read_report(&out);
    assert_eq!(report["suite"], "group");
    assert_eq!(report["seed"], 7);
    assert_eq!(report["config"]["group"]["samples"], 40);
    assert_eq!(report["summary"]["failed"], 0);
    let iso = report["checks"].as_array().unwrap().iter().find(|c| c["name"] == "group.isometry").unwrap();
    assert!(iso["defect"].as_f64().unwrap() < 1e-8);
}

#[test]
fn usage_errors_exit_with_two() {
    let bad_flag = verify().args(["glz", "--degree", "eight"]).output().unwrap();
    assert_eq!(bad_flag.status.code(), Some(2));
    let bad_range = verify().args(["selectors", "--m-min", "5", "--m-max", "3"]).output().unwrap();
    assert_eq!(bad_range.status.code(), Some(2));
    let bad_q = verify().args(["group", "--q", "1"]).output().unwrap();
    assert_eq!(bad_q.status.code(), Some(2));
    let missing = verify().output().unwrap();
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn failing_check_exits_one_and_still_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sel.json");
    // The drop-(a) control has no witness on this range, so the run fails.
    let run = verify()
        .args(["selectors", "--m-min", "2", "--m-max", "4", "--control-m-max", "4", "--identity-m-max", "6"])
        .arg("--output")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(run.status.code(), Some(1));
    let report = read_report(&out);
    assert!(report["summary"]["failed"].as_u64().unwrap() >= 1);
    let stdout = String::from_utf8(run.stdout).unwrap();
    assert!(stdout.contains("PASS  selectors.theorem_sweep"));
    assert!(stdout.contains("FAIL  selectors.positive_control_drop_a"));
}

#[test]
fn reports_are_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut bodies = Vec::new();
    for (i, threads) in ["1", "3"].iter().enumerate() {
        let out = dir.path().join(format!("glz{i}.json"));
        let status = verify()
            .env("VERIFY_THREADS", threads)
            .args(["glz", "--degree", "4", "--coeff-bound", "3", "--samples", "30", "-q"])
            .arg("--output")
            .arg(&out)
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
        let mut report = read_report(&out);
        report.as_object_mut().unwrap().remove("timestamp");
        bodies.push(report.to_string());
    }
    assert_eq!(bodies[0], bodies[1]);
}

#[test]
fn config_file_and_stdout_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let base = ecs_like_config();
    std::fs::write(&cfg, base.to_string()).unwrap();
    let run = verify()
        .args(["bridge", "--k-mode", "proof-range", "--output", "-", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let report: Value = serde_json::from_slice(&run.stdout).unwrap();
    assert_eq!(report["config"]["bridge"]["m_max"], 5);
    assert_eq!(report["config"]["bridge"]["k_mode"], "proof-range");
    assert!(String::from_utf8(run.stderr).unwrap().contains("bridge:"));
}

fn ecs_like_config() -> Value {
    let out = verify().args(["bridge", "--m-max", "5", "--exponent-m-max", "6", "-q", "-o", "-"]).output().unwrap();
    let mut report: Value = serde_json::from_slice(&out.stdout).unwrap();
    report["config"].take()
}

#[test]
fn drop_flag_adds_relaxed_sweep() {
    let run = verify()
        .args(["selectors", "--m-max", "5", "--k-abs-max", "6", "--drop", "e", "--control-m-max", "6", "--identity-m-max", "6"])
        .output()
        .unwrap();
    let stdout = String::from_utf8(run.stdout).unwrap();
    assert!(stdout.contains("WARN  selectors.relaxed_sweep_drop_e"), "{stdout}");
    assert!(stdout.contains("PASS  selectors.theorem_sweep"));
}
