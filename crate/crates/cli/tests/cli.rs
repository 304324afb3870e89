use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scenario() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios/small.json")
}

fn run(root: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_burstwatch"))
        .args(args)
        .env("BURSTWATCH_DATA_DIR", root)
        .env("SOURCE_DATE_EPOCH", "1700000000")
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs")
}

fn ok(root: &Path, args: &[&str]) -> String {
    let out = run(root, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}\n{}",
        String::from_utf8_lossy(&out.stderr),
        String::from_utf8_lossy(&out.stdout)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn chain(root: &Path) {
    let sc = scenario();
    let sc = sc.to_str().unwrap();
    ok(root, &["simulate", "--scenario", sc, "--seed", "3"]);
    ok(root, &["detect"]);
    ok(root, &["featurize"]);
    ok(root, &["build-index"]);
    ok(root, &["train", "--seed", "3", "--beta", "0.5", "--beta", "1,2"]);
    ok(root, &["predict"]);
    ok(root, &["evaluate"]);
}

fn tree(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for e in fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(root).unwrap().display().to_string(), fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn full_chain_from_an_empty_directory() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().join("fresh");
    chain(&root);
    for rel in ["reports/report.csv", "reports/report.md", "models/catalog.json", "models/historic_tables.json"] {
        assert!(root.join(rel).is_file(), "{rel}");
    }
    let md = fs::read_to_string(root.join("reports/report.md")).unwrap();
    assert!(md.contains("weighted-linear-svm-f0.5") && md.contains("weighted-linear-svm-f2"));
}

#[test]
fn chain_is_bit_identical_across_runs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    chain(a.path());
    chain(b.path());
    let (ta, tb) = (tree(a.path()), tree(b.path()));
    assert_eq!(ta.len(), tb.len());
    for ((na, xa), (nb, xb)) in ta.iter().zip(&tb) {
        assert_eq!(na, nb);
        assert!(xa == xb, "{na} differs between runs");
    }
}

#[test]
fn stats_reproduce_the_truth_file() {
    let dir = tempfile::tempdir().unwrap();
    let sc = scenario();
    ok(dir.path(), &["simulate", "--seed", "7", "--scenario", sc.to_str().unwrap()]);
    ok(dir.path(), &["detect"]);
    let out = ok(dir.path(), &["stats"]);
    assert_eq!(out.matches(" 0 mismatches").count(), 3, "{out}");
    let json: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("reports/test.lifecycle_stats.json")).unwrap()).unwrap();
    assert_eq!(json["truth"]["mismatches"].as_array().unwrap().len(), 0);
    assert!(json["truth"]["truth_records"].as_u64().unwrap() > 0);
}

#[test]
fn evaluate_without_models_names_train() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["evaluate"]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("burstwatch train"), "{err}");
}

#[test]
fn steps_out_of_order_name_the_missing_step() {
    let dir = tempfile::tempdir().unwrap();
    for (args, producer) in [
        (&["detect"][..], "simulate"),
        (&["featurize"][..], "detect"),
        (&["train"][..], "featurize"),
        (&["predict"][..], "train"),
    ] {
        let out = run(dir.path(), args);
        assert!(!out.status.success());
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains(&format!("burstwatch {producer}")), "{args:?}: {err}");
    }
}

#[test]
fn invalid_config_fails_before_touching_disk() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().join("never");
    for args in [
        &["--stages", "15,5", "detect"][..],
        &["--delta", "0", "detect"][..],
        &["--beta=-1", "train"][..],
    ] {
        let out = run(&root, args);
        assert!(!out.status.success(), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("invalid"), "{args:?}");
    }
    assert!(!root.exists());
}

#[test]
fn config_file_and_out_flag() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"stages": [5, 30], "delta": 45}"#).unwrap();
    let out_dir = dir.path().join("elsewhere");
    let sc = scenario();
    let out = Command::new(env!("CARGO_BIN_EXE_burstwatch"))
        .args(["--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()])
        .args(["simulate", "--dataset", "test", "--scenario", sc.to_str().unwrap()])
        .env_remove("BURSTWATCH_DATA_DIR")
        .env("RUST_LOG", "error")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let saved: serde_json::Value =
        serde_json::from_slice(&fs::read(out_dir.join("data/streams/test.scenario.json")).unwrap()).unwrap();
    assert_eq!(saved["lifecycle"]["delta"], serde_json::json!(45));
    assert!(!out_dir.join("data/streams/train.jsonl").exists());
}
