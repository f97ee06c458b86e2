//! End-to-end tests of the `fmie` binary: command grammar, exit codes,
//! reproducibility, and the golden-file pins for every rule.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fmie() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fmie"))
}

fn run(args: &[&str]) -> Output {
    fmie().args(args).output().expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 stderr")
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

#[test]
fn build_complete_10_has_45_edges_at_rate_one_ninth() {
    let out = run(&["geometry", "build", "complete", "--n", "10"]);
    assert!(out.status.success());
    let g: Value = serde_json::from_str(&stdout_of(&out)).expect("geometry JSON");
    let edges = g["edges"].as_array().expect("edges array");
    assert_eq!(edges.len(), 45);
    for e in edges {
        let rate = e[2].as_f64().expect("rate");
        assert!((rate - 1.0 / 9.0).abs() < 1e-15, "rate {rate}");
    }
}

#[test]
fn inspect_rejects_disconnected_geometry_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("islands.json");
    std::fs::write(&path, r#"{"n":4,"label":"islands","edges":[[0,1,1.0],[2,3,1.0]]}"#).unwrap();
    let out = run(&["geometry", "inspect", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("not irreducible"), "stderr: {}", stderr_of(&out));
}

#[test]
fn inspect_reports_size_and_row_sums() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("k6.json");
    let build = run(&["geometry", "build", "complete", "--n", "6", "--out", path.to_str().unwrap()]);
    assert!(build.status.success());
    let out = run(&["geometry", "inspect", "--input", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert!(text.contains("agents: 6"));
    assert!(text.contains("edges: 15"));
    assert!(text.contains("row-sum range: [1.000000, 1.000000]"));
    assert!(text.contains("irreducible"));
}

#[test]
fn bottleneck_on_complete_8_prints_unit_kappa() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("k8.json");
    run(&["geometry", "build", "complete", "--n", "8", "--out", path.to_str().unwrap()]);
    let out = run(&["geometry", "bottleneck", "--input", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert!(text.contains("kappa = 1.000000"), "stdout: {text}");
    // One profile row per subset size 1..=7.
    assert_eq!(text.lines().filter(|l| l.trim_start().starts_with(char::is_numeric)).count(), 7);
}

#[test]
fn bottleneck_above_the_exhaustive_cap_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("k30.json");
    run(&["geometry", "build", "complete", "--n", "30", "--out", path.to_str().unwrap()]);
    let out = run(&["geometry", "bottleneck", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn run_is_bit_reproducible_across_invocations() {
    let dir = tempfile::tempdir().unwrap();
    let config = golden_dir().join("voter.config.json");
    let mut outputs = Vec::new();
    for tag in ["a", "b"] {
        let traj = dir.path().join(format!("traj_{tag}.jsonl"));
        let summary = dir.path().join(format!("summary_{tag}.json"));
        let out = run(&[
            "run",
            "--config",
            config.to_str().unwrap(),
            "--trajectory",
            traj.to_str().unwrap(),
            "--summary",
            summary.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "stderr: {}", stderr_of(&out));
        outputs.push((std::fs::read(&traj).unwrap(), std::fs::read(&summary).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1], "same config, different bytes");
}

#[test]
fn run_requires_a_seed_somewhere() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("no_seed.json");
    std::fs::write(
        &config,
        r#"{
            "geometry": {"builder": "complete", "n": 2},
            "model": {"rule": "voter"},
            "replicas": 1,
            "horizon": 1.0,
            "sample_times": [0.0, 1.0]
        }"#,
    )
    .unwrap();
    let traj = dir.path().join("t.jsonl");
    let summary = dir.path().join("s.json");
    let out = run(&[
        "run",
        "--config",
        config.to_str().unwrap(),
        "--trajectory",
        traj.to_str().unwrap(),
        "--summary",
        summary.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("seed"));
    // The same config passes once --seed supplies the missing field.
    let out = run(&[
        "run",
        "--config",
        config.to_str().unwrap(),
        "--seed",
        "9",
        "--trajectory",
        traj.to_str().unwrap(),
        "--summary",
        summary.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
}

/// Every rule's pinned small run must reproduce its committed golden
/// trajectory and summary byte-for-byte.
#[test]
fn golden_runs_reproduce_for_every_rule() {
    let rules = [
        "token",
        "pandemic",
        "averaging",
        "pennies",
        "voter",
        "voter_two",
        "coalescing",
        "gambler",
        "interchange",
        "deference",
        "fashionista",
    ];
    let dir = tempfile::tempdir().unwrap();
    for rule in rules {
        let config = golden_dir().join(format!("{rule}.config.json"));
        let traj = dir.path().join(format!("{rule}.jsonl"));
        let summary = dir.path().join(format!("{rule}.json"));
        let out = run(&[
            "run",
            "--config",
            config.to_str().unwrap(),
            "--trajectory",
            traj.to_str().unwrap(),
            "--summary",
            summary.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{rule}: {}", stderr_of(&out));
        let got_traj = std::fs::read_to_string(&traj).unwrap();
        let want_traj =
            std::fs::read_to_string(golden_dir().join(format!("{rule}.trajectory.jsonl"))).unwrap();
        assert_eq!(got_traj, want_traj, "{rule} trajectory drifted from golden file");
        let got_summary = std::fs::read_to_string(&summary).unwrap();
        let want_summary =
            std::fs::read_to_string(golden_dir().join(format!("{rule}.summary.json"))).unwrap();
        assert_eq!(got_summary, want_summary, "{rule} summary drifted from golden file");
    }
}

#[test]
fn gambler_and_fashionista_goldens_carry_their_long_run_classes() {
    let gambler: Value = serde_json::from_str(
        &std::fs::read_to_string(golden_dir().join("gambler.summary.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(gambler["class"], "disordered-absorbing");
    let fashionista: Value = serde_json::from_str(
        &std::fs::read_to_string(golden_dir().join("fashionista.summary.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(fashionista["class"], "stationary");
}

#[test]
fn unknown_suite_name_exits_2() {
    let out = run(&["suite", "definitely-not-a-suite", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("unknown suite"));
}

#[test]
fn stochastic_suite_without_seed_exits_2() {
    let out = run(&["suite", "voter", "--geometry", "complete", "--n", "4"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("--seed"));
}

#[test]
fn averaging_suite_on_complete_5_passes() {
    let dir = tempfile::tempdir().unwrap();
    let report_path = dir.path().join("report.json");
    let out = run(&[
        "suite",
        "averaging",
        "--geometry",
        "complete",
        "--n",
        "5",
        "--replicas",
        "400",
        "--seed",
        "31",
        "--out",
        report_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(report["schema"], 1);
    assert_eq!(report["suite"], "averaging");
    assert!(report["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));
}

#[test]
fn window_profile_suite_is_deterministic_and_seedless() {
    let out = run(&["suite", "window-profile"]);
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    let report: Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert_eq!(report["suite"], "window-profile");
}

#[test]
fn suite_reports_do_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let mut reports = Vec::new();
    for (tag, threads) in [("one", "1"), ("four", "4")] {
        let path = dir.path().join(format!("report_{tag}.json"));
        let out = run(&[
            "--threads",
            threads,
            "suite",
            "voter",
            "--geometry",
            "complete",
            "--n",
            "4",
            "--replicas",
            "120",
            "--times",
            "0,1,2",
            "--seed",
            "77",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "stderr: {}", stderr_of(&out));
        reports.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(reports[0], reports[1], "thread count changed the report");
}

#[test]
fn failing_suite_exits_5_but_still_writes_the_report() {
    // Two replicas of the voter suite cannot satisfy its Monte Carlo
    // identities; what matters is the contract: report written, exit 5.
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = run(&[
        "suite",
        "voter",
        "--geometry",
        "complete",
        "--n",
        "4",
        "--replicas",
        "2",
        "--times",
        "0,1",
        "--seed",
        "3",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(5), "stderr: {}", stderr_of(&out));
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(report["checks"].as_array().unwrap().iter().any(|c| c["pass"] == false));
}
