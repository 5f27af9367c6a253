use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn wfguard(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wfguard")).args(args).output().unwrap()
}

fn run_into(out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["run", "--runs", "20", "--seed", "3", "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    wfguard(&args)
}

#[test]
fn run_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = wfguard(&[
        "run",
        "--category",
        "small",
        "--runs",
        "100",
        "--attack-rate",
        "0.3",
        "--weights",
        "0.1,0.1,0.8",
        "--seed",
        "42",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("metrics.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("run_id,time,price,mitigation"));
    assert_eq!(lines.count(), 100);

    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("metrics.json")).unwrap()).unwrap();
    assert_eq!(json["batch_size"], 100);
    assert_eq!(json["runs"].as_array().unwrap().len(), 100);
    for key in ["avg_time", "avg_price", "avg_mitigation"] {
        let v = json["normalized"][key].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&v), "{key} = {v}");
    }
    let log = fs::read_to_string(dir.path().join("run.log")).unwrap();
    assert!(log.lines().all(|l| l.split('\t').count() == 8));
    assert!(dir.path().join("trust.json").exists());
}

#[test]
fn invalid_flags_exit_with_usage_status() {
    for args in [
        &["run", "--attack-rate", "1.5"][..],
        &["run", "--p-detect", "-0.5"],
        &["run", "--runs", "0"],
        &["run", "--weights", "0.1,0.1"],
        &["run", "--category", "huge"],
        &["run", "--no-such-flag"],
        &["launch"],
    ] {
        assert_eq!(wfguard(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn unwritable_output_exits_with_runtime_status() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("occupied");
    fs::write(&file, "").unwrap();
    assert_eq!(run_into(&file.join("out"), &[]).status.code(), Some(1));
    assert_eq!(
        wfguard(&["run", "--catalog", "/nonexistent/catalog.json"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn help_lists_every_flag() {
    let help = String::from_utf8(wfguard(&["run", "--help"]).stdout).unwrap();
    for flag in [
        "--category",
        "--runs",
        "--attack-rate",
        "--weights",
        "--seed",
        "--p-detect",
        "--catalog",
        "--actions",
        "--out",
        "--config",
    ] {
        assert!(help.contains(flag), "{flag} missing from help");
    }
}

#[test]
fn config_file_values_are_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    fs::write(&config, r#"{"runs": 7, "seed": 9, "attack_rate": 0.5}"#).unwrap();
    let out = dir.path().join("out");
    let status = wfguard(&[
        "run",
        "--config",
        config.to_str().unwrap(),
        "--runs",
        "4",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(status.status.success());
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("metrics.json")).unwrap()).unwrap();
    assert_eq!(json["config"]["runs"], 4);
    assert_eq!(json["config"]["seed"], 9);
    assert_eq!(json["config"]["attack_rate"], 0.5);

    fs::write(&config, r#"{"runz": 7}"#).unwrap();
    assert_eq!(
        wfguard(&["run", "--config", config.to_str().unwrap()]).status.code(),
        Some(2)
    );
}

#[test]
fn catalog_generation_is_deterministic_and_usable() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for path in [&a, &b] {
        assert!(
            wfguard(&["gen-catalog", "--seed", "1", "--out", path.to_str().unwrap()])
                .status
                .success()
        );
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let json: serde_json::Value = serde_json::from_slice(&fs::read(&a).unwrap()).unwrap();
    let providers = json["providers"].as_array().unwrap();
    assert_eq!(providers.len(), 5);
    assert!(providers.iter().all(|p| p["services"].as_array().unwrap().len() == 3));

    let minimal = dir.path().join("min.json");
    let args = [
        "gen-catalog",
        "--providers",
        "1",
        "--services",
        "1",
        "--out",
        minimal.to_str().unwrap(),
    ];
    assert!(wfguard(&args).status.success());
    let out = dir.path().join("out");
    assert!(run_into(&out, &["--catalog", minimal.to_str().unwrap()])
        .status
        .success());
}

#[test]
fn identical_arms_compare_to_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = wfguard(&["compare", "--runs", "30", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let report: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("compare.json")).unwrap()).unwrap();
    assert_eq!(report["comparable"], true);
    for key in ["avg_time", "avg_price", "avg_mitigation"] {
        assert_eq!(report["delta"][key], 0.0);
    }
}

#[test]
fn arms_with_different_seeds_are_flagged() {
    let dir = tempfile::tempdir().unwrap();
    let out = wfguard(&[
        "compare",
        "--runs",
        "10",
        "--b-seed",
        "8",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("not comparable"));
    let report: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("compare.json")).unwrap()).unwrap();
    assert_eq!(report["comparable"], false);
    assert_eq!(report["warnings"].as_array().unwrap().len(), 1);
}

#[test]
fn b_config_overrides_only_named_keys() {
    let dir = tempfile::tempdir().unwrap();
    let b = dir.path().join("b.json");
    fs::write(&b, r#"{"weights": {"time": 0.4, "price": 0.4, "security": 0.2}}"#).unwrap();
    let out = wfguard(&[
        "compare",
        "--runs",
        "10",
        "--seed",
        "5",
        "--b-config",
        b.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let report: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("compare.json")).unwrap()).unwrap();
    assert_eq!(report["b"]["config"]["seed"], 5);
    assert_eq!(report["b"]["config"]["weights"]["time"], 0.4);
    assert_eq!(report["comparable"], true);
}
