use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const EXPE_6: &str = r#"{
  "model": {"dimension": 1, "extents": [6], "boundary": "open", "family": "random_klocal"},
  "suites": ["expE"],
  "seeds": [5]
}"#;

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn locality(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_locality"));
    cmd.args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn run_to(config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["run", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    locality(&args, &[])
}

#[test]
fn satisfied_run_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", EXPE_6);
    let out = dir.path().join("out");
    let o = run_to(&cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("bounds.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 800);
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(json["rows"].as_array().unwrap().len(), 800);
}

#[test]
fn injected_violation_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", EXPE_6);
    let o = run_to(&cfg, &dir.path().join("out"), &["--inject-violation"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stdout).contains("VIOLATION"));
}

#[test]
fn dimension_cap_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", EXPE_6);
    let out = dir.path().join("out");
    let o = locality(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], &[("LOCALITY_DIM_CAP", "32")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cap"));
}

#[test]
fn configuration_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), "bad.json", r#"{"model": {}, "suites": ["expE"], "seeds": [1]}"#);
    assert_eq!(run_to(&bad, &dir.path().join("o"), &[]).status.code(), Some(1));
    let missing = dir.path().join("missing.json");
    assert_eq!(run_to(&missing, &dir.path().join("o"), &[]).status.code(), Some(1));
    let cfg = write_config(dir.path(), "c.json", EXPE_6);
    assert_eq!(run_to(&cfg, &dir.path().join("o"), &["--suite", "nope"]).status.code(), Some(1));
    assert_eq!(locality(&["frobnicate"], &[]).status.code(), Some(1));
}

#[test]
fn suite_override_selects_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", EXPE_6);
    let out = dir.path().join("out");
    let o = run_to(&cfg, &out, &["--suite", "hb"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(out.join("bounds.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 10);
    assert!(csv.lines().skip(1).all(|l| l.starts_with("hb_bound,")));
}

#[test]
fn output_is_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"model": {"dimension": 1, "extents": [6], "boundary": "open", "family": "random_klocal"},
            "suites": ["expE", "dist", "product", "normphi", "lowspec", "dist2"], "seeds": [1, 2]}"#,
    );
    let mut files = Vec::new();
    for (name, threads) in [("a", "1"), ("b", "4"), ("c", "4")] {
        let out = dir.path().join(name);
        let o = run_to(&cfg, &out, &["--threads", threads]);
        assert_eq!(o.status.code(), Some(0));
        files.push(std::fs::read(out.join("bounds.csv")).unwrap());
    }
    assert_eq!(files[0], files[1]);
    assert_eq!(files[1], files[2]);
}
