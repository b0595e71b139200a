use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn qnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qnet")).args(args).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("scenario.json");
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

const SMALL: &str = r#"{"topology": {"kind": "dumbbell"}, "seeds": [1, 2], "horizon_intervals": 6}"#;

#[test]
fn run_writes_metrics_summary_and_events() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let o = qnet(&["run", &cfg]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("metrics.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert!(lines[0].contains("active_pgt_count"));
    assert_eq!(lines.len(), 1 + 2 * 6);
    let summary = read_json(&dir.path().join("summary.json"));
    assert_eq!(summary["summary"]["runs"], 2);
    assert!(dir.path().join("events.jsonl").exists());
}

#[test]
fn overrides_and_seed_reach_the_run() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("out");
    let o =
        qnet(&["run", &cfg, "--override", "horizon_intervals=3", "--override", "bonus_enabled=false", "--seed", "9", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let summary = read_json(&out.join("summary.json"));
    assert_eq!(summary["horizon_intervals"], 3);
    assert_eq!(summary["bonus_enabled"], false);
    assert_eq!(summary["per_seed"][0][0], 9);
    assert_eq!(summary["summary"]["pgas_bonus"], 0);
}

#[test]
fn json_format_writes_metrics_json() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let o = qnet(&["run", &cfg, "--format", "json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = read_json(&dir.path().join("metrics.json"));
    assert_eq!(rows.as_array().unwrap().len(), 12);
}

#[test]
fn missing_config_is_a_config_error() {
    let o = qnet(&["run", "/nonexistent/scenario.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/nonexistent/scenario.json"), "{}", stderr(&o));
}

#[test]
fn invalid_field_names_its_path() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), r#"{"epsilon_service": 2.0}"#);
    let o = qnet(&["run", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("epsilon_service"), "{}", stderr(&o));
}

#[test]
fn unknown_subcommand_exits_with_usage_error() {
    let o = qnet(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn gen_topology_writes_a_loadable_file() {
    let dir = TempDir::new().unwrap();
    let o =
        qnet(&["gen-topology", "--backbones", "1", "--local-areas", "2", "--end-nodes", "12", "--seed", "4", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let topo = dir.path().join("topology.json");
    assert!(topo.exists());
    let cfg = write_config(dir.path(), r#"{"topology": {"kind": "file", "path": "topology.json"}, "seeds": [0], "horizon_intervals": 3}"#);
    let o = qnet(&["run", &cfg]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn gen_topology_dumbbell_goes_to_stdout() {
    let o = qnet(&["gen-topology", "--dumbbell"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v.is_object());
}

#[test]
fn infeasible_topology_is_rejected() {
    let o = qnet(&["gen-topology", "--backbones", "0", "--local-areas", "3", "--end-nodes", "10"]);
    assert_eq!(o.status.code(), Some(2));
}

fn export(dir: &Path) {
    let cfg = write_config(dir, r#"{"topology": {"kind": "dumbbell"}, "seeds": [5], "horizon_intervals": 12}"#);
    let o = qnet(&["run", &cfg, "--export-schedule"]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn exported_schedule_validates() {
    let dir = TempDir::new().unwrap();
    export(dir.path());
    let s = dir.path().join("schedule.json");
    let p = dir.path().join("pgts.json");
    let o = qnet(&["validate", s.to_str().unwrap(), p.to_str().unwrap()]);
    assert!(o.status.success(), "{}{}", String::from_utf8_lossy(&o.stdout), stderr(&o));
    assert!(String::from_utf8_lossy(&o.stdout).trim_end().ends_with("valid"));
}

#[test]
fn overlapping_entries_fail_validation() {
    let dir = TempDir::new().unwrap();
    export(dir.path());
    let s = dir.path().join("schedule.json");
    let mut schedule = read_json(&s);
    let components = schedule["components"].as_object_mut().unwrap();
    let busy = components.values_mut().find(|v| v.as_array().unwrap().len() >= 2).expect("a component with two entries");
    let entries = busy.as_array_mut().unwrap();
    let first_start = entries[0]["start_ns"].clone();
    entries[1]["start_ns"] = first_start;
    std::fs::write(&s, serde_json::to_string(&schedule).unwrap()).unwrap();
    let p = dir.path().join("pgts.json");
    let o = qnet(&["validate", s.to_str().unwrap(), p.to_str().unwrap(), "--format", "json"]);
    assert_eq!(o.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["valid"], false);
}

#[test]
fn empty_schedule_without_tasks_is_valid() {
    let dir = TempDir::new().unwrap();
    let s = dir.path().join("schedule.json");
    let p = dir.path().join("pgts.json");
    std::fs::write(&s, r#"{"interval": 0, "version": 1, "components": {}}"#).unwrap();
    std::fs::write(&p, "[]").unwrap();
    let o = qnet(&["validate", s.to_str().unwrap(), p.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn unreadable_schedule_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let s = dir.path().join("schedule.json");
    std::fs::write(&s, "not json").unwrap();
    let o = qnet(&["validate", s.to_str().unwrap(), s.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bench_admit_smoke() {
    let o = qnet(&["bench-admit", "--n", "20,40", "--k", "5,10,15,20", "--repeats", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = String::from_utf8_lossy(&o.stdout).into_owned();
    assert_eq!(csv.lines().count(), 1 + 8);
    assert!(stderr(&o).contains("fit k at N=20"));
}

#[test]
fn bench_schedule_smoke() {
    let o = qnet(&["bench-schedule", "--n", "5,10,15,20,25", "--repeats", "1", "--format", "json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["points"].as_array().unwrap().len(), 5);
}

#[test]
fn bench_rejects_zero_repeats() {
    let o = qnet(&["bench-schedule", "--n", "5", "--repeats", "0"]);
    assert_eq!(o.status.code(), Some(2));
}
