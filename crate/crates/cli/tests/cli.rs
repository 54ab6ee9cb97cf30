use std::process::{Command, Output};

use serde_json::Value;

fn cosetlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cosetlab"))
        .args(args)
        .env_remove("COSETLAB_SEED")
        .output()
        .expect("binary runs")
}

fn lines(out: &Output) -> Vec<Value> {
    String::from_utf8(out.stdout.clone())
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn moe_example_lands_near_analytic_rate() {
    let out = cosetlab(&["moe", "--d", "8", "--adversary", "split-basis", "--trials", "4096", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let lines = lines(&out);
    assert_eq!(lines.len(), 4097);
    let summary = lines.last().unwrap();
    assert_eq!(summary["type"], "summary");
    let rate = summary["rate"].as_f64().unwrap();
    let sigma = (0.0625f64 * 0.9375 / 4096.0).sqrt();
    assert!((rate - 0.0625).abs() < 4.0 * sigma, "{rate}");
    assert!(summary["ci_low"].as_f64().unwrap() <= rate && rate <= summary["ci_high"].as_f64().unwrap());
    assert_eq!(summary["params"]["d"], 8);
    assert_eq!(lines[0]["type"], "trial");
    assert!(lines[0]["side_outcomes"].is_array());
}

#[test]
fn resample_example_passes() {
    let out = cosetlab(&["resample-check", "--support", "64", "--epsilon", "0.05"]);
    assert_eq!(out.status.code(), Some(0));
    let lines = lines(&out);
    assert!(lines[..lines.len() - 1].iter().all(|l| l["truncated_tv"].as_f64().unwrap() <= 0.05));
    assert_eq!(lines.last().unwrap()["rate"], 1.0);
}

#[test]
fn ace_demo_roundtrips() {
    let out = cosetlab(&["ace-demo", "--n", "8", "--dist", "uniform:48", "--epsilon", "0.1", "--msg", "a7"]);
    assert_eq!(out.status.code(), Some(0));
    let lines = lines(&out);
    assert_eq!(lines[0]["decoded"], "a7");
}

#[test]
fn unknown_names_are_usage_errors() {
    assert_eq!(cosetlab(&["moe", "--adversary", "nobody"]).status.code(), Some(2));
    assert_eq!(cosetlab(&["cp-game", "--scheme", "nothing", "--trials", "1"]).status.code(), Some(2));
    assert_eq!(cosetlab(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn caps_are_capacity_errors() {
    let out = cosetlab(&["moe", "--d", "16", "--trials", "1"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("protection-games"));
    assert_eq!(cosetlab(&["prf-check", "--m", "30"]).status.code(), Some(3));
    assert_eq!(cosetlab(&["ti-check", "--dim", "32"]).status.code(), Some(3));
}

#[test]
fn env_seed_and_output_file() {
    let dir = std::env::temp_dir().join(format!("cosetlab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("out.jsonl");
    let via_env = Command::new(env!("CARGO_BIN_EXE_cosetlab"))
        .args(["prf-check", "--m", "8", "--trials", "3", "--output", path.to_str().unwrap()])
        .env("COSETLAB_SEED", "5")
        .output()
        .unwrap();
    assert_eq!(via_env.status.code(), Some(0));
    assert!(via_env.stdout.is_empty());
    let flag = cosetlab(&["prf-check", "--m", "8", "--trials", "3", "--seed", "5"]);
    assert_eq!(std::fs::read(&path).unwrap(), flag.stdout);
    let other = cosetlab(&["prf-check", "--m", "8", "--trials", "3", "--seed", "6"]);
    assert_ne!(other.stdout, flag.stdout);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn strong_ap_reports_side_probabilities() {
    let out = cosetlab(&["strong-ap", "--d", "4", "--gamma", "0.1", "--trials", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let lines = lines(&out);
    assert_eq!(lines[0]["probabilities"].as_array().unwrap().len(), 2);
    let summary = lines.last().unwrap();
    assert_eq!(summary["degenerate"], false);
    assert!(summary["threshold"].as_f64().unwrap() > 0.1);
}
