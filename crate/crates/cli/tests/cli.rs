//! Runs the `asploop` binary against the bundled fixtures.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use asploop_core::fixtures::FIXTURE_DIR;

fn fixture(rel: &str) -> PathBuf {
    Path::new(FIXTURE_DIR).join(rel)
}

fn asploop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_asploop")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn search(dir: &Path, script: &str, extra: &[&str]) -> Output {
    let dataset = fixture("puzzles.json");
    let script = fixture(&format!("scripts/{script}"));
    let mut args = vec!["search", "--dataset", dataset.to_str().unwrap(), "--script", script.to_str().unwrap(), "--out", dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    asploop(&args)
}

#[test]
fn solve_reports_the_unique_model() {
    let out = asploop(&["solve", fixture("encodings/anniversary.lp").to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("models: 1\n"), "{text}");
    assert!(text.contains("reward: 1.0"), "{text}");
    assert!(text.contains("assignment(wedding,herbert,50)"), "{text}");
}

#[test]
fn solve_exit_codes() {
    let broken = asploop(&["solve", fixture("encodings/anniversary_listing.lp").to_str().unwrap()]);
    assert_eq!(code(&broken), 1);
    assert!(stdout(&broken).starts_with("ERROR"));
    assert!(stdout(&broken).contains("A1"));

    let missing = asploop(&["solve", "/nonexistent/program.lp"]);
    assert_eq!(code(&missing), 2);
    assert_eq!(code(&asploop(&["solve"])), 2);
    assert_eq!(code(&asploop(&["frobnicate"])), 2);
}

#[test]
fn solve_caps_enumeration() {
    let out = asploop(&["solve", "--cap", "5", fixture("crosscheck/14_grid_3x3.lp").to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("models: more than 5"), "{text}");
    assert!(text.contains("reward: -1.0"), "{text}");
}

#[test]
fn search_requires_its_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert_eq!(code(&asploop(&["search", "--out", d])), 2);
    let dataset = fixture("puzzles.json");
    assert_eq!(code(&asploop(&["search", "--dataset", dataset.to_str().unwrap(), "--out", d])), 2);
    assert_eq!(code(&asploop(&["search", "--dataset", dataset.to_str().unwrap(), "--script", "/nonexistent.jsonl", "--out", d])), 2);
    assert_eq!(code(&asploop(&["search", "--dataset", "/nonexistent.json", "--out", d])), 2);
}

#[test]
fn search_is_deterministic_and_order_independent() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ra = search(a.path(), "e2e_n5.jsonl", &["--n", "5", "--backtrack-limit", "0", "--no-regen", "--jobs", "1"]);
    let rb = search(b.path(), "e2e_n5.jsonl", &["--n", "5", "--backtrack-limit", "0", "--no-regen", "--jobs", "3"]);
    assert_eq!(code(&ra), 0, "{}", String::from_utf8_lossy(&ra.stderr));
    assert_eq!(code(&rb), 0);
    assert!(stdout(&ra).contains("accuracy: 6/6"));
    for name in ["outcomes.jsonl", "trace.jsonl", "metrics.json", "instances.csv", "buckets.csv"] {
        assert!(read(a.path(), name) == read(b.path(), name), "{name} differs");
    }
    let manifest: serde_json::Value = serde_json::from_slice(&read(a.path(), "manifest.json")).unwrap();
    assert_eq!(manifest["command"], "search");
    assert_eq!(manifest["partial"], false);
    assert_eq!(manifest["reproducible"], true);
    assert_eq!(manifest["dataset"]["instances"], 6);
}

#[test]
fn partial_search_exits_one_and_keeps_results() {
    // The backtracking script only covers one puzzle; the others run out of
    // scripted completions.
    let dir = tempfile::tempdir().unwrap();
    let out = search(dir.path(), "search_backtrack.jsonl", &[]);
    assert_eq!(code(&out), 1);
    let outcomes = String::from_utf8(read(dir.path(), "outcomes.jsonl")).unwrap();
    assert_eq!(outcomes.lines().count(), 1);
    let trace = String::from_utf8(read(dir.path(), "trace.jsonl")).unwrap();
    assert!(trace.lines().any(|l| l.contains(r#""event":"backtracked""#)));
    let manifest: serde_json::Value = serde_json::from_slice(&read(dir.path(), "manifest.json")).unwrap();
    assert_eq!(manifest["partial"], true);
    assert_eq!(manifest["failures"].as_array().unwrap().len(), 5);
}

#[test]
fn eval_rescores_search_outcomes() {
    let run = tempfile::tempdir().unwrap();
    assert_eq!(code(&search(run.path(), "e2e_n1.jsonl", &["--n", "1", "--backtrack-limit", "0", "--no-regen"])), 0);
    let scored = tempfile::tempdir().unwrap();
    let outcomes = run.path().join("outcomes.jsonl");
    let out = asploop(&[
        "eval",
        "--dataset",
        fixture("puzzles.json").to_str().unwrap(),
        "--outcomes",
        outcomes.to_str().unwrap(),
        "--out",
        scored.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    for name in ["metrics.json", "instances.csv", "buckets.csv"] {
        assert!(read(run.path(), name) == read(scored.path(), name), "{name} differs");
    }
    let metrics: serde_json::Value = serde_json::from_slice(&read(scored.path(), "metrics.json")).unwrap();
    assert!(metrics["accuracy"].as_f64().unwrap() < 1.0);
    let buckets = String::from_utf8(read(scored.path(), "buckets.csv")).unwrap();
    assert_eq!(buckets.lines().count(), 6, "{buckets}");
}

#[test]
fn datagen_is_deterministic() {
    let dataset = fixture("puzzles.json");
    let script = fixture("scripts/datagen_mixed.jsonl");
    let mut runs = Vec::new();
    for jobs in ["1", "2"] {
        let dir = tempfile::tempdir().unwrap();
        let out = asploop(&[
            "datagen",
            "--dataset",
            dataset.to_str().unwrap(),
            "--script",
            script.to_str().unwrap(),
            "--jobs",
            jobs,
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        runs.push((read(dir.path(), "sft.jsonl"), read(dir.path(), "pref.jsonl"), read(dir.path(), "stats.json")));
        let manifest: serde_json::Value = serde_json::from_slice(&read(dir.path(), "manifest.json")).unwrap();
        assert_eq!(manifest["command"], "datagen");
        assert_eq!(manifest["artifacts"], serde_json::json!(["pref.jsonl", "sft.jsonl", "stats.json"]));
    }
    assert!(runs[0] == runs[1]);
    assert!(!runs[0].0.is_empty() && !runs[0].1.is_empty());
}

#[test]
fn fixtures_verify_passes() {
    let out = asploop(&["fixtures", "verify"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(!stdout(&out).contains("FAIL"));
}
