use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn evalq() -> Command {
    Command::new(env!("CARGO_BIN_EXE_evalq"))
}

fn write_config(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn payload(path: &Path) -> Value {
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    v.as_object_mut().unwrap().remove("wall_clock_seconds");
    v
}

#[test]
fn variance_run_writes_both_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "v.json",
        r#"{"seed":3,"n":3,"k":1,"samples":10000,"ensemble":{"kind":"haar"},
            "observable":{"kind":"pauli","label":"ZII"}}"#,
    );
    let out = dir.path().join("out");
    let status = evalq()
        .args(["variance", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(
        status.status.success(),
        "{}",
        String::from_utf8_lossy(&status.stderr)
    );
    let report = payload(&out.join("variance.json"));
    assert_eq!(report["schema_version"], "evalq.run/1");
    let est = report["results"]["estimate"].as_f64().unwrap();
    let se = report["results"]["stderr"].as_f64().unwrap();
    assert!((est - 1.0 / 9.0).abs() < 4.0 * se, "{est} ± {se}");
    let csv = std::fs::read_to_string(out.join("variance.csv")).unwrap();
    assert!(csv.starts_with("ensemble,observable,copies"));
    assert!(!out.join("variance.json.tmp").exists());
}

#[test]
fn identical_runs_give_identical_payloads() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "m.json",
        r#"{"seed":9,"n":2,"t":2,"samples":200,"ensemble":{"kind":"clifford"}}"#,
    );
    let mut reports = Vec::new();
    let out = dir.path().join("run");
    for workers in ["1", "4"] {
        let s = evalq()
            .args(["moments", "--workers", workers, "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap();
        assert!(s.success());
        reports.push(payload(&out.join("moments.json")));
    }
    assert_eq!(reports[0], reports[1]);
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "b.json",
        r#"{"seed":1,"bound":"selflearn_basis","n":10,"beta":1.0,"tau":0.1}"#,
    );
    let out = dir.path().join("o");
    let s = evalq()
        .args(["bounds", "--seed", "77", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(s.success());
    let r = payload(&out.join("bounds.json"));
    assert_eq!(r["config"]["seed"], 77);
    let v = r["results"]["lower_bound_value"].as_f64().unwrap();
    assert!((v - (1.0 - 1.0 / 1024.0) * 1024.0).abs() < 1e-9);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let s = evalq().args(["validate"]).output().unwrap();
    assert_eq!(s.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&s.stderr).contains("seed"));

    let bad = write_config(
        dir.path(),
        "bad.json",
        r#"{"seed":1,"n":1,"t":2,"samples":10,"ensemble":{"kind":"haar"}}"#,
    );
    let s = evalq()
        .args(["learn", "--config"])
        .arg(&bad)
        .output()
        .unwrap();
    assert_eq!(s.status.code(), Some(2));

    let s = evalq()
        .args(["moments", "--config"])
        .arg(dir.path().join("missing.json"))
        .output()
        .unwrap();
    assert_eq!(s.status.code(), Some(1));

    let good = write_config(
        dir.path(),
        "good.json",
        r#"{"experiment":"moments","seed":1,"n":1,"t":2,"samples":10,"ensemble":{"kind":"haar"}}"#,
    );
    let s = evalq()
        .args(["validate", "--config"])
        .arg(&good)
        .output()
        .unwrap();
    assert_eq!(s.status.code(), Some(0));
}

#[test]
fn list_names_every_subcommand() {
    let s = evalq().arg("list").output().unwrap();
    let text = String::from_utf8(s.stdout).unwrap();
    for name in ["variance", "levy", "learn", "bounds", "bp-probe", "moments"] {
        assert!(text.contains(name), "{name}");
    }
}

#[test]
fn shipped_configs_run() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let dir = tempfile::tempdir().unwrap();
    for entry in std::fs::read_dir(&root).unwrap() {
        let path = entry.unwrap().path();
        let cfg: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        let sub = cfg["experiment"].as_str().unwrap();
        let out = dir.path().join(path.file_stem().unwrap());
        let s = evalq()
            .arg(sub)
            .arg("--config")
            .arg(&path)
            .arg("--out")
            .arg(&out)
            .output()
            .unwrap();
        assert!(
            s.status.success(),
            "{}: {}",
            path.display(),
            String::from_utf8_lossy(&s.stderr)
        );
        let report = payload(&out.join(format!("{sub}.json")));
        match sub {
            "learn" => assert_eq!(report["results"]["success_rate"], 1.0),
            "bounds" => assert_eq!(report["results"]["lower_bound_value"], 1023.0),
            _ => {}
        }
    }
}
