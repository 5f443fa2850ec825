use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const TRAIN: &str = r#"{
    "schema_version": 1,
    "train": {
        "architecture": {"data_modes": 1, "layers": 2, "cutoff": 12},
        "task": {"family": "binary-pm-epsilon", "epsilon": 0.8},
        "n_s": 1.0,
        "restarts": 1,
        "max_iterations": 200,
        "polish_iterations": 50
    }
}"#;

fn bosonet(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bosonet"))
        .current_dir(dir)
        .env_remove("RUST_LOG")
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn run_dirs(out: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(out).unwrap().map(|e| e.unwrap().path()).collect();
    v.sort();
    v
}

#[test]
fn train_writes_a_record_with_the_error_probability() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "t.json", TRAIN);
    let out = bosonet(tmp.path(), &["--out", "runs", "train", "--config", "t.json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let dirs = run_dirs(&tmp.path().join("runs"));
    assert_eq!(dirs.len(), 1);
    let record: Value = serde_json::from_str(&fs::read_to_string(dirs[0].join("record.json")).unwrap()).unwrap();
    let pe = record["payload"]["error"].as_f64().expect("payload carries P_E");
    assert!((0.0..0.5).contains(&pe));
    assert!(record["config_hash"].as_str().unwrap().len() == 64);
    assert!(dirs[0].join("loss.csv").exists());
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "t.json", TRAIN);
    let a = bosonet(tmp.path(), &["--out", "a", "--seed", "5", "train", "--config", "t.json"]);
    let b = bosonet(tmp.path(), &["--out", "b", "--seed", "5", "train", "--config", "t.json"]);
    assert!(a.status.success() && b.status.success());
    let pa = run_dirs(&tmp.path().join("a"))[0].join("payload.json");
    let pb = run_dirs(&tmp.path().join("b"))[0].join("payload.json");
    assert_eq!(fs::read(pa).unwrap(), fs::read(pb).unwrap());
}

#[test]
fn unknown_keys_exit_with_config_code() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = TRAIN.replace("\"n_s\": 1.0", "\"n_s\": 1.0, \"stepsize\": 3");
    write(tmp.path(), "bad.json", &bad);
    let out = bosonet(tmp.path(), &["train", "--config", "bad.json"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("stepsize"));
}

#[test]
fn empty_grid_exits_with_config_code() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = TRAIN.trim_end().trim_end_matches('}').to_string()
        + r#", "sweep": {"axis": {"kind": "epsilon", "values": []}, "methods": ["vqc"]}}"#;
    write(tmp.path(), "s.json", &cfg);
    let out = bosonet(tmp.path(), &["sweep", "--config", "s.json"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn missing_inputs_exit_with_code_four() {
    let tmp = tempfile::tempdir().unwrap();
    let out = bosonet(tmp.path(), &["train", "--config", "absent.json"]);
    assert_eq!(out.status.code(), Some(4));
    let out = bosonet(tmp.path(), &["analyze", "photon-dist", "--record", "no-such-run"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn environment_overrides_reach_the_record() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "t.json", TRAIN);
    let out = Command::new(env!("CARGO_BIN_EXE_bosonet"))
        .current_dir(tmp.path())
        .env("BOSONET_TRAIN__TASK__EPSILON", "0.9")
        .args(["--out", "runs", "train", "--config", "t.json"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let dir = &run_dirs(&tmp.path().join("runs"))[0];
    let record: Value = serde_json::from_str(&fs::read_to_string(dir.join("record.json")).unwrap()).unwrap();
    assert_eq!(record["config"]["train"]["task"]["epsilon"].as_f64(), Some(0.9));
}

#[test]
fn vacuum_photon_distribution_is_a_delta() {
    let tmp = tempfile::tempdir().unwrap();
    let out = bosonet(tmp.path(), &["analyze", "photon-dist", "--vacuum", "--cutoff", "6", "--out", "o"]);
    assert!(out.status.success());
    let text = fs::read_to_string(tmp.path().join("o/photon-dist.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,probability"));
    let probs: Vec<f64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(probs.len(), 6);
    assert!((probs[0] - 1.0).abs() < 1e-12);
    assert!(probs[1..].iter().all(|p| p.abs() < 1e-12));
}

#[test]
fn wigner_of_a_trained_probe_is_normalised() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "t.json", TRAIN);
    assert!(bosonet(tmp.path(), &["--out", "runs", "train", "--config", "t.json"]).status.success());
    let run = run_dirs(&tmp.path().join("runs"))[0].clone();
    let out = bosonet(
        tmp.path(),
        &["--out", "w", "analyze", "wigner", "--record", run.to_str().unwrap(), "--half-width", "6", "--points", "61"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(tmp.path().join("w/wigner.csv")).unwrap();
    let step = 12.0 / 60.0;
    let total: f64 = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap().parse::<f64>().unwrap())
        .sum::<f64>()
        * step
        * step;
    assert!((total - 1.0).abs() < 1e-3, "∫W = {total}");
}

#[test]
fn transform_check_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = bosonet(tmp.path(), &["--seed", "3", "analyze", "transform-check", "--out", "tc"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let report: Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("tc/transform-check.json")).unwrap()).unwrap();
    assert!(report["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true));
}

#[test]
fn sweep_writes_one_csv_per_method() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = TRAIN.trim_end().trim_end_matches('}').to_string()
        + r#", "sweep": {"axis": {"kind": "epsilon", "values": [0.7, 0.9]},
              "methods": ["vqc", "gaussian-homodyne", "helstrom-squeezed"]}}"#;
    write(tmp.path(), "s.json", &cfg);
    let out = bosonet(tmp.path(), &["--out", "runs", "sweep", "--config", "s.json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = &run_dirs(&tmp.path().join("runs"))[0];
    for m in ["vqc", "gaussian-homodyne", "helstrom-squeezed"] {
        let text = fs::read_to_string(run.join(format!("{m}.csv"))).unwrap();
        assert!(text.starts_with("epsilon,error_probability\n"), "{m}: {text}");
        assert_eq!(text.lines().count(), 3);
    }
    assert!(run.join("vqc-sweep-ns-1.csv").exists());
}
