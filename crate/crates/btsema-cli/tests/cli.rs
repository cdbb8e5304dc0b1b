//! End-to-end checks of the command line surface: exit codes, trace output,
//! and the diff report.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../btsema/tests/fixtures").join(name)
}

fn btsema(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_btsema")).args(args).output().expect("binary runs")
}

fn code(output: &Output) -> i32 {
    output.status.code().expect("exit code")
}

#[test]
fn validate_accepts_the_tour_tree() {
    let out = btsema(&["validate", "--tree", fixture("tour.bt").to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("20 nodes"));
}

#[test]
fn validate_rejects_an_ill_formed_tree_with_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.bt");
    fs::write(&path, "(reactive-sequence (action A))").unwrap();
    let out = btsema(&["validate", "--tree", path.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("at least 2"), "stderr: {stderr}");
}

#[test]
fn parse_errors_exit_3_with_a_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.bt");
    fs::write(&path, "(selector (action A) (action B))").unwrap();
    let out = btsema(&["validate", "--tree", path.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("1:2"), "stderr: {stderr}");
    assert!(stderr.contains("unknown keyword"), "stderr: {stderr}");

    let out = btsema(&["validate", "--tree", "/nonexistent/x.bt"]);
    assert_eq!(code(&out), 3);
}

#[test]
fn run_reproduces_the_golden_trace_on_stdout() {
    let out = btsema(&[
        "run",
        "--tree",
        fixture("tour.bt").to_str().unwrap(),
        "--scenario",
        fixture("tour_scenario.json").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let golden = fs::read_to_string(fixture("tour_golden.jsonl")).unwrap();
    assert_eq!(String::from_utf8_lossy(&out.stdout), golden);
}

#[test]
fn oracle_and_run_agree_via_diff() {
    let dir = tempfile::tempdir().unwrap();
    let engine = dir.path().join("engine.jsonl");
    let oracle = dir.path().join("oracle.jsonl");
    for (cmd, path) in [("run", &engine), ("oracle", &oracle)] {
        let out = btsema(&[
            cmd,
            "--tree",
            fixture("tour.bt").to_str().unwrap(),
            "--scenario",
            fixture("tour_scenario.json").to_str().unwrap(),
            "--trace",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0);
    }
    let out = btsema(&["diff", engine.to_str().unwrap(), oracle.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("traces equal"));
}

#[test]
fn diff_reports_divergence_with_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    fs::write(&a, "{\"t\":0,\"node\":\"/\",\"ev\":\"root_result\",\"v\":\"SUCCESS\"}\n").unwrap();
    fs::write(&b, "{\"t\":0,\"node\":\"/\",\"ev\":\"root_result\",\"v\":\"FAILURE\"}\n").unwrap();
    let out = btsema(&["diff", a.to_str().unwrap(), b.to_str().unwrap()]);
    assert_eq!(code(&out), 4);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("diverge at event 0"), "stdout: {stdout}");
    assert!(stdout.contains("cycle 0"), "stdout: {stdout}");
}

#[test]
fn runtime_faults_exit_2_and_still_write_the_trace() {
    let dir = tempfile::tempdir().unwrap();
    let tree = dir.path().join("switch.bt");
    fs::write(&tree, "(switch :key \"route\" (action A) (action B))").unwrap();
    let scenario = dir.path().join("scenario.json");
    fs::write(
        &scenario,
        r#"{"leaves": {"A": {"activations": [{"duration": 0, "outcome": "SUCCESS"}]},
                       "B": {"activations": [{"duration": 0, "outcome": "SUCCESS"}]}},
            "max_ticks": 3}"#,
    )
    .unwrap();
    let trace = dir.path().join("out.jsonl");
    let out = btsema(&[
        "run",
        "--tree",
        tree.to_str().unwrap(),
        "--scenario",
        scenario.to_str().unwrap(),
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    let written = fs::read_to_string(&trace).unwrap();
    assert!(written.contains("\"ev\":\"error\""), "trace: {written}");
    assert!(written.contains("route"), "trace: {written}");
}

#[test]
fn scenario_that_does_not_fit_the_tree_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("empty.json");
    fs::write(&scenario, r#"{"max_ticks": 3}"#).unwrap();
    let out = btsema(&[
        "run",
        "--tree",
        fixture("tour.bt").to_str().unwrap(),
        "--scenario",
        scenario.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("no script"));
}

#[test]
fn malformed_scenario_json_exits_3_with_a_pointer() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("bad.json");
    fs::write(
        &scenario,
        r#"{"leaves": {"A": {"activations": [{"duration": -2, "outcome": "SUCCESS"}]}}, "max_ticks": 3}"#,
    )
    .unwrap();
    let out = btsema(&[
        "run",
        "--tree",
        fixture("tour.bt").to_str().unwrap(),
        "--scenario",
        scenario.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 3);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("/leaves/A/activations/0/duration"), "stderr: {stderr}");
}

#[test]
fn export_dot_is_deterministic_and_complete() {
    let args = ["export-dot", "--tree"];
    let first = btsema(&[args[0], args[1], fixture("tour.bt").to_str().unwrap()]);
    let second = btsema(&[args[0], args[1], fixture("tour.bt").to_str().unwrap()]);
    assert_eq!(code(&first), 0);
    assert_eq!(first.stdout, second.stdout);
    let dot = String::from_utf8_lossy(&first.stdout);
    assert!(dot.starts_with("digraph"));
    assert_eq!(dot.matches("label=").count(), 20, "one label per node");
    assert_eq!(dot.matches("->").count(), 19, "one edge per parent-child pair");
    assert!(dot.contains("poi=\\\"PoI 1\\\""), "leaf params appear in labels: {dot}");
}

#[test]
fn max_ticks_override_and_stop_on_terminal() {
    let out = btsema(&[
        "run",
        "--tree",
        fixture("tour.bt").to_str().unwrap(),
        "--scenario",
        fixture("tour_scenario.json").to_str().unwrap(),
        "--max-ticks",
        "3",
    ]);
    assert_eq!(code(&out), 0);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("\"t\":2"));
    assert!(!stdout.contains("\"t\":3"));

    // The tour first reaches a terminal root response at cycle 12.
    let out = btsema(&[
        "run",
        "--tree",
        fixture("tour.bt").to_str().unwrap(),
        "--scenario",
        fixture("tour_scenario.json").to_str().unwrap(),
        "--stop-on-terminal",
    ]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stderr).contains("terminal SUCCESS"));
}
