//! End-to-end runs of the binary over temp files.

use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_auction-bench"))
}

fn temp_path(name: &str) -> PathBuf {
    let mut p = std::env::temp_dir();
    p.push(format!("auction-bench-test-{}-{name}", std::process::id()));
    p
}

#[test]
fn gen_learn_analyze_pipeline() {
    let prior_path = temp_path("prior.json");
    let result_path = temp_path("result.json");

    let out = bin()
        .args([
            "gen",
            "--family",
            "unit01",
            "--n",
            "2",
            "--support",
            "8",
            "--seed",
            "5",
        ])
        .arg("--out")
        .arg(&prior_path)
        .output()
        .expect("gen runs");
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(&prior_path).expect("prior written");
    assert!(text.contains("\"family\": \"unit01\""));

    let out = bin()
        .args([
            "learn", "--family", "unit01", "--eps", "0.1", "--n", "2", "--delta", "0", "--seed",
            "9",
        ])
        .arg("--prior")
        .arg(&prior_path)
        .arg("--out")
        .arg(&result_path)
        .output()
        .expect("learn runs");
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let result: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&result_path).expect("result written"))
            .expect("valid json");
    assert!(result["budget"]["queries"].is_array());
    assert!(result["learned_prior"]["buyers"].is_array());

    let out = bin()
        .args(["analyze", "--eps", "0.25"])
        .arg("--prior")
        .arg(&prior_path)
        .output()
        .expect("analyze runs");
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value =
        serde_json::from_slice(&out.stdout).expect("analyze emits json");
    assert!(report["opt"].is_number());
    assert!(report["thresholds"]["thetas"].is_array());

    std::fs::remove_file(&prior_path).ok();
    std::fs::remove_file(&result_path).ok();
}

#[test]
fn bench_writes_csv_with_fixed_columns() {
    let csv_path = temp_path("bench.csv");
    let out = bin()
        .args([
            "bench",
            "--suite",
            "single-grid",
            "--eps",
            "0.2",
            "--trials",
            "5",
            "--seed",
            "2",
        ])
        .arg("--out")
        .arg(&csv_path)
        .output()
        .expect("bench runs");
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(&csv_path).expect("csv written");
    assert!(csv.starts_with("trial,opt,learned,ratio,gap,budget,pass,ms\n"));
    assert_eq!(csv.lines().count(), 6);
    std::fs::remove_file(&csv_path).ok();
}

#[test]
fn lowerbound_instances_load_back() {
    let path = temp_path("hill.json");
    let out = bin()
        .args([
            "lowerbound",
            "--family",
            "unit-hill",
            "--eps",
            "0.02",
            "--index",
            "3",
        ])
        .arg("--out")
        .arg(&path)
        .output()
        .expect("lowerbound runs");
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(&path).expect("file written");
    assert!(text.contains("\"kind\": \"curve\""));
    std::fs::remove_file(&path).ok();
}
