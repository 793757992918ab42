use std::path::Path;
use std::process::{Command, Output};

use swarm_inspect::harness::{read_json, PlanDocument};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_swarm-inspect"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_plan_validate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let sc = dir.path().join("sc.json");
    let plan = dir.path().join("plan.json");
    assert_eq!(code(&run(&["generate", "-n", "25", "--seed", "3", "--out", s(&sc)])), 0);
    let o = run(&[
        "plan",
        s(&sc),
        "--uavs",
        "3",
        "--budget",
        "unlimited",
        "--lambda",
        "1.5",
        "--out",
        s(&plan),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc: PlanDocument = read_json(&plan).unwrap();
    assert!(doc.feasible);
    assert_eq!(doc.trajectories.len(), 3);
    assert_eq!(code(&run(&["validate", s(&plan), s(&sc)])), 0);
}

#[test]
fn tampered_plan_fails_validation() {
    let dir = tempfile::tempdir().unwrap();
    let sc = dir.path().join("sc.json");
    let plan = dir.path().join("plan.json");
    run(&["generate", "-n", "12", "--seed", "8", "--out", s(&sc)]);
    assert_eq!(
        code(&run(&[
            "plan",
            s(&sc),
            "--uavs",
            "2",
            "--budget",
            "unlimited",
            "--out",
            s(&plan)
        ])),
        0
    );
    let mut doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&plan).unwrap()).unwrap();
    let c = doc["costs_j"][0].as_f64().unwrap();
    doc["costs_j"][0] = serde_json::json!(c + 1000.0);
    std::fs::write(&plan, doc.to_string()).unwrap();
    assert_eq!(code(&run(&["validate", s(&plan), s(&sc)])), 1);
}

#[test]
fn baseline_and_oracle_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let sc = dir.path().join("sc.json");
    run(&["generate", "-n", "5", "--seed", "2", "--out", s(&sc)]);
    for cmd in ["baseline", "oracle"] {
        let out = dir.path().join(format!("{cmd}.json"));
        let o = run(&[
            cmd,
            s(&sc),
            "--uavs",
            "2",
            "--budget",
            "unlimited",
            "--seed",
            "4",
            "--out",
            s(&out),
        ]);
        assert_eq!(code(&o), 0, "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(code(&run(&["validate", s(&out), s(&sc)])), 0);
    }
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let sc = dir.path().join("sc.json");
    run(&["generate", "-n", "5", "--out", s(&sc)]);
    assert_eq!(code(&run(&["plan", s(&sc), "--uavs", "2", "--budget", "1e5"])), 2);
    assert_eq!(code(&run(&["plan", s(&sc), "--budget", "lots"])), 2);
    assert_eq!(code(&run(&["plan", s(&sc), "--lambda", "0.5"])), 2);
    assert_eq!(code(&run(&["plan", s(&dir.path().join("missing.json"))])), 2);
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"runs_per_cell": 0}"#).unwrap();
    assert_eq!(code(&run(&["experiment", s(&bad)])), 2);
    assert_eq!(code(&run(&["no-such-command"])), 2);
}

#[test]
fn experiment_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let out = dir.path().join("out");
    std::fs::write(
        &cfg,
        r#"{"point_counts": [10], "fleet_sizes": [1, 2], "runs_per_cell": 2}"#,
    )
    .unwrap();
    let o = run(&["experiment", s(&cfg), "--out", s(&out), "--seed", "5", "--jobs", "2"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in swarm_inspect::harness::OUTPUT_FILES {
        assert!(out.join(f).exists(), "{f}");
    }
    let results = std::fs::read_to_string(out.join("results.csv")).unwrap();
    assert_eq!(results.lines().count(), 1 + 2 * 2 * 2);
    assert!(results.starts_with(
        "N,K,run,planner,total_J,flight_J,hover_tx_J,planning_cost_J,inspection_time_s,feasible,plan_wall_ms"
    ));
}
