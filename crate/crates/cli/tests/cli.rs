use std::path::Path;
use std::process::{Command, Output};

fn apn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_apn"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn genworld_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out in [&a, &b] {
        let o = apn(&["genworld", "--kind", "maze", "--seed", "3", "--out", path(out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let w: serde_json::Value = serde_json::from_slice(&std::fs::read(&a).unwrap()).unwrap();
    assert!(w["obstacles"].as_array().unwrap().len() > 10);
}

#[test]
fn genworld_params_override_and_validation() {
    let dir = tempfile::tempdir().unwrap();
    let params = dir.path().join("p.json");
    let out = dir.path().join("w.json");
    std::fs::write(&params, r#"{"rooms": [1, 1], "size": [6.0, 6.0], "furniture": 0}"#).unwrap();
    let o = apn(&["genworld", "--kind", "rooms", "--out", path(&out), "--params", path(&params)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let w: serde_json::Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    // floor, ceiling and four outer walls only
    assert_eq!(w["obstacles"].as_array().unwrap().len(), 6);

    std::fs::write(&params, r#"{"corridor": 1.0}"#).unwrap();
    let o = apn(&["genworld", "--kind", "maze", "--out", path(&out), "--params", path(&params)]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));

    let o = apn(&["genworld", "--kind", "castle", "--out", path(&out)]);
    assert!(!o.status.success());
}

#[test]
fn explore_timeout_exit_code_and_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let world = dir.path().join("w.json");
    let cfg = dir.path().join("c.json");
    let out = dir.path().join("out");
    assert!(apn(&["genworld", "--kind", "pillars", "--seed", "1", "--out", path(&world)]).status.success());
    std::fs::write(&cfg, r#"{"t_max": 2.0, "compute_coverage": false}"#).unwrap();
    let o = apn(&["explore", "--config", path(&cfg), "--world", path(&world), "--out", path(&out), "--seed", "5"]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(summary["result"], "timeout");
    assert_eq!(summary["seed"], 5);
    assert!(out.join("metrics.csv").is_file());
    assert!(out.join("roadmap.json").is_file());
}

#[test]
fn explore_reports_missing_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, "{}").unwrap();
    let o = apn(&["explore", "--config", path(&cfg)]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("no world"));
    let o = apn(&["explore", "--config", path(&dir.path().join("absent.json"))]);
    assert!(!o.status.success());
}

#[test]
fn oracle_coverage_lists_surface_voxels() {
    let dir = tempfile::tempdir().unwrap();
    let world = dir.path().join("w.json");
    let params = dir.path().join("p.json");
    let out = dir.path().join("oracle.json");
    std::fs::write(&params, r#"{"rooms": [1, 1], "size": [4.0, 4.0], "furniture": 0}"#).unwrap();
    assert!(apn(&["genworld", "--kind", "rooms", "--out", path(&world), "--params", path(&params)]).status.success());
    let o = apn(&["oracle-coverage", "--world", path(&world), "--out", path(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let doc: serde_json::Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    let count = doc["count"].as_u64().unwrap();
    assert!(count > 0);
    assert_eq!(doc["voxels"].as_array().unwrap().len() as u64, count);
    assert_eq!(doc["resolution"], 0.2);
}
