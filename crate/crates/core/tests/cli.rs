//! The `advscen` binary end to end, on toy scenes and tiny budgets.

use std::path::Path;
use std::process::{Command, Output};

fn advscen(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_advscen")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn empty_scenario_list_gives_empty_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bench");
    let o = advscen(&["benchmark", "--out", arg(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("cells.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1, "header only: {csv}");
    let t = advscen(&["transfer", "--out", arg(&dir.path().join("t"))]);
    assert!(t.status.success());
    assert_eq!(std::fs::read_to_string(dir.path().join("t/transfer.csv")).unwrap().lines().count(), 1);
}

#[test]
fn attack_writes_record_scenario_and_sweeps() {
    let dir = tempfile::tempdir().unwrap();
    let (out, sweeps) = (dir.path().join("a"), dir.path().join("sweeps"));
    let o = advscen(&["--seed", "3", "--dump-sweeps", arg(&sweeps), "attack", "toy:lead_vehicle", "--algo", "rs", "--budget", "5", "--out", arg(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("5 queries"));
    let record: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("lead_vehicle_record.json")).unwrap()).unwrap();
    assert_eq!(record["seed"], 3);
    assert_eq!(record["queries"].as_array().unwrap().len(), 5);
    let adv = advscen::scenario::io::load_scenario(&out.join("lead_vehicle_adversarial.json")).unwrap();
    assert_eq!(adv.actors.len(), advscen::toy::lead_vehicle().actors.len());
    let n = std::fs::read_dir(&sweeps).unwrap().count();
    assert_eq!(n, adv.n_history);

    let svg = dir.path().join("curve.svg");
    let p = advscen(&["plot", "--records", arg(&out.join("lead_vehicle_record.json")), "--out", arg(&svg)]);
    assert!(p.status.success());
    assert!(std::fs::read_to_string(&svg).unwrap().contains("<polyline"));
}

#[test]
fn benchmark_sweeps_the_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b");
    let o = advscen(&["benchmark", "toy:cut_in", "toy:crossing", "--algos", "rs,ga", "--objectives", "M1,M3", "--budget", "4", "--stack", "ground-truth", "--out", arg(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("cells.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 2 * 2);
    for f in ["algorithms.csv", "actor_counts.csv", "objectives.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
}

#[test]
fn curate_and_render() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("log.json");
    let cars: Vec<(f64, f64, f64)> = (0..4).map(|i| (78.0 + 8.0 * i as f64, 3.0, 2.0)).collect();
    advscen::scenario::io::save_scenario(&advscen::toy::long_log(32, &cars), &log).unwrap();
    let out = dir.path().join("window.json");
    let o = advscen(&["curate", arg(&log), "--out", arg(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("chosen window"));
    let w = advscen::scenario::io::load_scenario(&out).unwrap();
    assert_eq!(w.horizon(), w.n_history + w.n_future);
    assert_eq!(w.n_future, 10);

    let svg = dir.path().join("scene.svg");
    let r = advscen(&["plot", "--scenario", arg(&out), "--stack", "sensor", "--out", arg(&svg)]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
}

#[test]
fn bad_input_fails_cleanly() {
    for args in [
        &["attack", "toy:nowhere"][..],
        &["attack", "toy:cut_in", "--objective", "M9"],
        &["attack", "toy:cut_in", "--m", "0"],
        &["attack", "/nonexistent/scene.json"],
        &["plot", "--out", "/tmp/x.svg"],
    ] {
        let o = advscen(args);
        assert!(!o.status.success(), "{args:?}");
        assert!(String::from_utf8_lossy(&o.stderr).contains("error"), "{args:?}");
    }
}
