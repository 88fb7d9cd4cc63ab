use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures")
}

fn gddforge(store: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gddforge"))
        .arg("--store")
        .arg(store)
        .args(args)
        .env_remove("GDDFORGE_BACKEND")
        .env_remove("GDDFORGE_DATA_DIR")
        .output()
        .unwrap()
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn stderr_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).unwrap_or_else(|_| panic!("{}", String::from_utf8_lossy(&out.stderr)))
}

#[test]
fn eval_prints_table_with_expected_averages() {
    let tmp = tempfile::tempdir().unwrap();
    let csv = fixtures().join("reference_scores.csv");
    let out = gddforge(tmp.path(), &["eval", csv.to_str().unwrap()]);
    assert!(out.status.success());
    let table = String::from_utf8(out.stdout).unwrap();
    assert_eq!(gddforge_core::eval::avg_column(&table), ["4.2", "3.5", "3.0", "4.7", "4.8"]);
    assert!(table.contains("Ours (Finetuned)"));

    let out = gddforge(tmp.path(), &["eval", csv.to_str().unwrap(), "--format", "radar_csv"]);
    let radar = String::from_utf8(out.stdout).unwrap();
    assert!(radar.starts_with("model,compilation,adherence,best_practices,modularity"));

    let out = gddforge(tmp.path(), &["eval", csv.to_str().unwrap(), "--format", "pie_chart"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn generate_twice_gives_identical_digests() {
    let tmp = tempfile::tempdir().unwrap();
    let store = tmp.path().join("store");
    let gdd = fixtures().join("gdd/action_rpg.md");
    let mut digests = Vec::new();
    for run in ["a", "b"] {
        let job = stdout_json(&gddforge(&store, &["ingest", gdd.to_str().unwrap()]));
        assert_eq!(job["state"], "spec_ready");
        let id = job["job_id"].as_str().unwrap();
        let out_dir = tmp.path().join(run);
        let manifest = stdout_json(&gddforge(
            &store,
            &["generate", id, "--backend", "mock", "--out", out_dir.to_str().unwrap()],
        ));
        digests.push(manifest["package_digest"].as_str().unwrap().to_string());

        let checked = stdout_json(&gddforge(&store, &["validate", out_dir.to_str().unwrap()]));
        assert_eq!(checked["failing"], Value::Array(vec![]));
        assert_eq!(checked["manifest"]["mismatches"], Value::Array(vec![]));
    }
    assert_eq!(digests[0], digests[1]);

    let again = gddforge(
        &store,
        &["generate", "job-missing", "--out", tmp.path().join("c").to_str().unwrap()],
    );
    assert_eq!(again.status.code(), Some(1));
    assert_eq!(stderr_json(&again)["error"]["code"], "NotFound");
}

#[test]
fn validate_broken_directory_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let broken = fixtures().join("csharp/broken");
    let out = gddforge(tmp.path(), &["validate", broken.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_json(&out);
    assert_eq!(err["error"]["code"], "ValidationFailed");
    assert_eq!(err["error"]["exit_code"], 2);
    let files: Vec<&str> = err["error"]["detail"]["files"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    let expected = std::fs::read_dir(&broken).unwrap().count();
    assert_eq!(files.len(), expected);
    assert!(files.iter().all(|f| f.ends_with(".cs")));

    let good = fixtures().join("csharp/good");
    let out = gddforge(tmp.path(), &["validate", good.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn usage_errors_are_json_with_exit_1() {
    let tmp = tempfile::tempdir().unwrap();
    let out = gddforge(tmp.path(), &["frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)["error"]["exit_code"], 1);

    let out = gddforge(tmp.path(), &["--help"]);
    assert!(out.status.success());
}

#[test]
fn state_errors_and_spec_edits() {
    let tmp = tempfile::tempdir().unwrap();
    let store = tmp.path().join("store");
    let gdd = fixtures().join("gdd/puzzle.md");
    let job = stdout_json(&gddforge(&store, &["ingest", gdd.to_str().unwrap()]));
    let id = job["job_id"].as_str().unwrap();

    let out = gddforge(&store, &["plan", id, "--show"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stderr_json(&out)["error"]["code"], "WrongState");

    let spec_out = gddforge(&store, &["spec", id]);
    let mut spec: Value = stdout_json(&spec_out);
    spec["title"] = Value::String("Renamed Puzzle".into());
    let spec_file = tmp.path().join("spec.json");
    std::fs::write(&spec_file, spec.to_string()).unwrap();
    let job = stdout_json(&gddforge(&store, &["spec", id, "--set", spec_file.to_str().unwrap()]));
    assert_eq!(job["state"], "spec_ready");
    assert_eq!(stdout_json(&gddforge(&store, &["spec", id]))["title"], "Renamed Puzzle");

    std::fs::write(&spec_file, r#"{"title": 3}"#).unwrap();
    let out = gddforge(&store, &["spec", id, "--set", spec_file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"]["code"], "SchemaViolation");
}

#[test]
fn export_pairs_appends_jsonl() {
    let tmp = tempfile::tempdir().unwrap();
    let store = tmp.path().join("store");
    let gdd = fixtures().join("gdd/platformer.md");
    let job = stdout_json(&gddforge(&store, &["ingest", gdd.to_str().unwrap()]));
    let id = job["job_id"].as_str().unwrap();
    let corpus = tmp.path().join("pairs.jsonl");
    let out = gddforge(&store, &["export-pairs", id, "--out", corpus.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));

    stdout_json(&gddforge(&store, &["generate", id]));
    for _ in 0..2 {
        stdout_json(&gddforge(&store, &["export-pairs", id, "--out", corpus.to_str().unwrap()]));
    }
    let text = std::fs::read_to_string(&corpus).unwrap();
    assert_eq!(text.lines().count(), 2);
    for line in text.lines() {
        let v: Value = serde_json::from_str(line).unwrap();
        assert!(v.is_object());
    }
}
