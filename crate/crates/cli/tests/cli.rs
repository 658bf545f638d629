use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn toolkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_toolkit"))
        .args(args)
        .output()
        .expect("spawn toolkit")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn fixture(seed: u64) -> (TempDir, PathBuf) {
    let dir = TempDir::new().unwrap();
    let out = toolkit(&[
        "fixture",
        "--dir",
        dir.path().to_str().unwrap(),
        "--seed",
        &seed.to_string(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let config = dir.path().join("config.toml");
    (dir, config)
}

fn run(stage: &str, config: &Path, extra: &[&str]) -> Output {
    let mut args = vec![stage, "--config", config.to_str().unwrap()];
    args.extend_from_slice(extra);
    toolkit(&args)
}

fn read(dir: &Path, rel: &str) -> Vec<u8> {
    fs::read(dir.join(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

#[test]
fn fixture_then_all_writes_every_stage() {
    let (dir, config) = fixture(42);
    let out = run("all", &config, &[]);
    assert!(out.status.success(), "{}", stderr(&out));
    let root = dir.path().join("out");
    for rel in [
        "ingest/daily_counts.csv",
        "causality/fevd.json",
        "topics/topics.csv",
        "dedup/pairs.csv",
        "figures/irf_grid.svg",
    ] {
        assert!(root.join(rel).is_file(), "missing {rel}");
    }
    let manifest: serde_json::Value = serde_json::from_slice(&read(&root, "manifest.json")).unwrap();
    let stages = manifest["stages"].as_array().unwrap();
    assert_eq!(stages.len(), 6);
    assert!(stages.iter().all(|s| s["ok"] == true));
    let err = stderr(&out);
    assert!(err.contains("causality"), "{err}");
}

#[test]
fn missing_input_is_a_validation_error() {
    let (dir, config) = fixture(1);
    fs::remove_file(dir.path().join("posts.csv")).unwrap();
    let out = run("ingest", &config, &[]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("inputs.posts") && err.contains("posts.csv"), "{err}");
}

#[test]
fn unreadable_config_is_a_validation_error() {
    let out = toolkit(&["all", "--config", "/nonexistent/config.toml"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("/nonexistent/config.toml"));
}

#[test]
fn missing_artifact_names_the_stage_to_rerun() {
    let (_dir, config) = fixture(2);
    let out = run("causality", &config, &[]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(
        err.contains("missing artifact") && err.contains("/ingest/") && err.contains("`ingest`"),
        "{err}"
    );
}

#[test]
fn rerunning_one_stage_reproduces_its_artifacts() {
    let (dir, config) = fixture(3);
    assert!(run("all", &config, &[]).status.success());
    let root = dir.path().join("out");
    let files = [
        "topics/assignments.csv",
        "topics/topics.csv",
        "topics/timeline.csv",
        "topics/summary.json",
    ];
    let before: Vec<_> = files.iter().map(|f| read(&root, f)).collect();
    fs::remove_dir_all(root.join("topics")).unwrap();
    let ingest_before = read(&root, "ingest/debunks.json");

    let out = run("topics", &config, &[]);
    assert!(out.status.success(), "{}", stderr(&out));
    for (f, b) in files.iter().zip(&before) {
        assert_eq!(&read(&root, f), b, "{f} differs after rerun");
    }
    assert_eq!(read(&root, "ingest/debunks.json"), ingest_before);
}

#[test]
fn seed_and_out_overrides() {
    let (dir, config) = fixture(4);
    let alt = dir.path().join("alt");
    let out = run("ingest", &config, &["--seed", "7", "--out", alt.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(alt.join("ingest/daily_counts.csv").is_file());
    assert!(!dir.path().join("out").exists());
    let manifest: serde_json::Value = serde_json::from_slice(&read(&alt, "manifest.json")).unwrap();
    assert_eq!(manifest["seed"], 7);
}

#[test]
fn bad_config_value_lists_the_problem() {
    let (dir, config) = fixture(5);
    let text = fs::read_to_string(&config)
        .unwrap()
        .replace("alpha = 0.01", "alpha = 1.5");
    fs::write(&config, text).unwrap();
    let out = run("all", &config, &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("engagement.alpha"));
    assert!(!dir.path().join("out").exists());
}
