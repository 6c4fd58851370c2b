use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn agboost(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_agboost"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("spawn agboost")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    std::fs::write(dir.join(name), text).unwrap();
    name.to_string()
}

const RUN_CONFIG: &str = r#"{
    "dataset": {"source": "synthetic", "kind": "halfspace", "n": 6, "count": 300, "label_noise": 0.1},
    "split": {"drop_fraction": 0.5},
    "boost": {"variant": "plain", "eta": 0.1, "rounds": 15, "mode": {"kind": "monte_carlo", "m": 200}},
    "seed": 5
}"#;

#[test]
fn run_reports_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "run.json", RUN_CONFIG);
    let mut runs = Vec::new();
    for _ in 0..2 {
        let o = agboost(dir.path(), &["run", "--config", &cfg, "--out", "a.json"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        runs.push((
            std::fs::read(dir.path().join("a.json")).unwrap(),
            std::fs::read(dir.path().join("a.ensemble.json")).unwrap(),
        ));
    }
    assert_eq!(runs[0], runs[1]);
    let a = &runs[0].0;

    // A different seed gives a different report.
    let o = agboost(dir.path(), &["run", "--config", &cfg, "--out", "c.json", "--seed", "6"]);
    assert!(o.status.success());
    assert_ne!(*a, std::fs::read(dir.path().join("c.json")).unwrap());
}

#[test]
fn config_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let bad_eta = write(
        dir.path(),
        "eta.json",
        &RUN_CONFIG.replace("\"eta\": 0.1", "\"eta\": -1.0"),
    );
    let unknown = write(dir.path(), "unknown.json", &RUN_CONFIG.replace("\"seed\"", "\"sede\""));
    let bad_variant = write(
        dir.path(),
        "variant.json",
        &RUN_CONFIG.replace("\"plain\"", "\"fancy\""),
    );
    for cfg in [&bad_eta, &unknown, &bad_variant] {
        let o = agboost(dir.path(), &["run", "--config", cfg]);
        assert_eq!(
            o.status.code(),
            Some(2),
            "{cfg}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
    let o = agboost(dir.path(), &["run", "--config", &bad_variant]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("fancy"));

    let o = agboost(dir.path(), &["run", "--config", "missing.json"]);
    assert_eq!(o.status.code(), Some(2));
    let o = agboost(dir.path(), &["params", "--epsilon", "0"]);
    assert_eq!(o.status.code(), Some(2));
    let o = agboost(dir.path(), &["params", "--variant", "pab", "--epsilon", "0.1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn data_errors_exit_3() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "one_class.csv", "0.1,a\n0.2,a\n0.3,a\n");
    write(dir.path(), "narrow.csv", "0.1\n0.2\n");
    let one_class = RUN_CONFIG.replace(
        r#"{"source": "synthetic", "kind": "halfspace", "n": 6, "count": 300, "label_noise": 0.1}"#,
        r#"{"source": "csv", "path": "one_class.csv", "schema": {"header": false}}"#,
    );
    let narrow = one_class.replace("one_class.csv", "narrow.csv").replace(
        r#""schema": {"header": false}"#,
        r#""schema": {"header": false, "label_column": 3}"#,
    );
    let bad_sum = one_class.replace(r#""schema""#, r#""sha256": "00", "schema""#);
    for (name, text) in [("c1.json", one_class), ("c2.json", narrow), ("c3.json", bad_sum)] {
        let cfg = write(dir.path(), name, &text);
        let o = agboost(dir.path(), &["run", "--config", &cfg]);
        assert_eq!(
            o.status.code(),
            Some(3),
            "{name}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
}

#[test]
fn exhausted_fresh_budget_exits_4() {
    let dir = TempDir::new().unwrap();
    let text = RUN_CONFIG.replace(
        r#""boost": {"variant": "plain", "eta": 0.1, "rounds": 15, "mode": {"kind": "monte_carlo", "m": 200}}"#,
        r#""boost": {"variant": "pab", "eta": 0.1, "rounds": 50, "pab_batch": 40}"#,
    );
    let cfg = write(dir.path(), "pab.json", &text);
    let o = agboost(dir.path(), &["run", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(4), "{}", String::from_utf8_lossy(&o.stderr));

    let text = text.replace(
        r#""pab_batch": 40"#,
        r#""pab_batch": 40, "truncate_on_exhaustion": true"#,
    );
    let cfg = write(dir.path(), "pab_trunc.json", &text);
    let o = agboost(dir.path(), &["run", "--config", &cfg, "--out", "r.json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(report["report"]["truncated"], serde_json::Value::Bool(true));
}

#[test]
fn synth_manifest_checksum_verifies() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "synth.json",
        r#"{"kind": "halfspace", "n": 4, "count": 64, "seed": 9}"#,
    );
    let o = agboost(dir.path(), &["synth", "--config", &cfg, "--out", "cube.csv"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let manifest = agboost::data::Manifest::load(&dir.path().join("cube.manifest.json")).unwrap();
    let entry = manifest.entry("cube").unwrap();
    let ds = entry.load("cube").unwrap();
    assert_eq!(ds.len(), 64);
    assert_eq!(ds.dim(), 4);

    // The manifest drives a run, and tampering is detected.
    let run = write(
        dir.path(),
        "run.json",
        r#"{"dataset": {"source": "manifest", "manifest": "cube.manifest.json", "name": "cube"},
            "boost": {"variant": "plain", "eta": 0.2, "rounds": 5}}"#,
    );
    assert!(agboost(dir.path(), &["run", "--config", &run]).status.success());
    let mut text = std::fs::read_to_string(dir.path().join("cube.csv")).unwrap();
    text.push_str("1,1,1,1,1\n");
    std::fs::write(dir.path().join("cube.csv"), text).unwrap();
    assert_eq!(agboost(dir.path(), &["run", "--config", &run]).status.code(), Some(3));
}

#[test]
fn potentials_writes_expected_rows() {
    let dir = TempDir::new().unwrap();
    let o = agboost(dir.path(), &["potentials", "--out", "p.csv"]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(dir.path().join("p.csv")).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with('z'));
    assert_eq!(lines.count(), 601);
}

#[test]
fn params_prints_schedule() {
    let dir = TempDir::new().unwrap();
    let o = agboost(dir.path(), &["params", "--epsilon", "0.1", "--gamma", "1"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().any(|l| l == "T=200"), "{text}");
    assert!(text.lines().any(|l| l == "eta=0.1"), "{text}");
}

#[test]
fn cv_and_grid_run_end_to_end() {
    let dir = TempDir::new().unwrap();
    let cv = write(
        dir.path(),
        "cv.json",
        &RUN_CONFIG.replace(
            r#""split": {"drop_fraction": 0.5}"#,
            r#""split": {"k": 3, "drop_fraction": 0.5}"#,
        ),
    );
    let o = agboost(
        dir.path(),
        &["cv", "--config", &cv, "--out", "cv_out.json", "--workers", "2"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("cv_out.json")).unwrap()).unwrap();
    assert_eq!(out["folds"].as_array().unwrap().len(), 3);

    let grid = RUN_CONFIG
        .replace(
            r#""split": {"drop_fraction": 0.5}"#,
            r#""split": {"k": 2, "inner_k": 2, "drop_fraction": 0.5}"#,
        )
        .replace(
            r#""seed": 5"#,
            r#""seed": 5, "grids": {"rounds": [2, 5], "m": [50, 100]}"#,
        );
    let grid = write(dir.path(), "grid.json", &grid);
    let o = agboost(dir.path(), &["grid", "--config", &grid]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}
