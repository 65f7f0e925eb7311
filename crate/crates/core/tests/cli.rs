use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn carlab(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_carlab"));
    cmd.args(args).env_remove("CARLAB_MAX_MODES");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn config(dir: &tempfile::TempDir, name: &str, body: &str) -> String {
    let path = dir.path().join(name);
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

fn example(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "docs", "configs", name].iter().collect();
    p.to_string_lossy().into_owned()
}

#[test]
fn small_verify_car_passes_and_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(&dir, "c.json", r#"{"space": {"site_count": 4}, "triples": 20, "norm_samples": 5}"#);
    let out = dir.path().join("r.csv");
    let o = carlab(&["verify-car", "--config", &cfg, "--out", out.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("# carlab "));
    assert!(text.contains("# config_sha256 "));
    assert!(text.contains("check,samples,max_residual,tolerance,pass"));
    assert!(!text.contains(",false"));
}

#[test]
fn rounding_floor_tolerance_fails() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(&dir, "c.json", r#"{"space": {"site_count": 4}, "tolerance": 1e-30, "triples": 20}"#);
    let o = carlab(&["verify-car", "--config", &cfg], &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains(",false"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("FAIL"));
}

#[test]
fn dense_cap_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(&dir, "c.json", r#"{"space": {"site_count": 13}}"#);
    let o = carlab(&["verify-car", "--config", &cfg], &[]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("exceeds the dense cap"), "{err}");

    let o = carlab(&["verify-car", "--max-modes", "13"], &[]);
    assert_eq!(o.status.code(), Some(2));
    let o = carlab(&["verify-car", "--config", &cfg], &[("CARLAB_MAX_MODES", "12")]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn env_raises_cap() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(&dir, "c.json", r#"{"space": {"site_count": 11}, "triples": 2, "norm_samples": 1}"#);
    assert_eq!(carlab(&["verify-car", "--config", &cfg], &[]).status.code(), Some(2));
    let o = carlab(&["verify-car", "--config", &cfg], &[("CARLAB_MAX_MODES", "11")]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn schema_violations_are_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(&dir, "c.json", r#"{"sede": 3}"#);
    let o = carlab(&["localize", "--config", &cfg], &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sede"));
    let o = carlab(&["partition", "--config", "/nonexistent/carlab.json"], &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn seed_flag_is_deterministic() {
    let a = carlab(&["partition", "--seed", "3"], &[]);
    let b = carlab(&["partition", "--seed", "3"], &[]);
    let c = carlab(&["partition", "--seed", "4"], &[]);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn documented_examples_parse_and_pass() {
    for name in ["localize", "net-fixed-points", "partition"] {
        let o = carlab(&[name, "--config", &example(&format!("{name}.json"))], &[]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&o.stderr));
    }
}
