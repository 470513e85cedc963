use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn renvol(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_renvol")).arg("--out").arg(dir).args(args).output().unwrap()
}

fn config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.cfg");
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn verify_volume_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = renvol(dir.path(), &["verify", "--suite", "volume"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(!String::from_utf8_lossy(&out.stdout).contains("FAIL"));
    assert!(dir.path().join("verify.csv").exists());
    assert!(json(&dir.path().join("verify.json")).as_array().is_some_and(|a| !a.is_empty()));
}

#[test]
fn ball_volume_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "# ball of radius 1\nsurface = ball\nradius = 1.0\n");
    let out = renvol(dir.path(), &["--config", &cfg, "volume"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let w = json(&dir.path().join("volume.json"))["w"].as_f64().unwrap();
    assert!((w + std::f64::consts::TAU).abs() < 1e-8, "{w}");
    let vr = json(&dir.path().join("renormalized.json"))["renormalized_volume"].as_f64().unwrap();
    assert!((vr + std::f64::consts::PI).abs() < 1e-6, "{vr}");
    assert!(dir.path().join("renormalized.csv").exists());
}

#[test]
fn epstein_sample_writes_meshes() {
    let dir = tempfile::tempdir().unwrap();
    let out = renvol(dir.path(), &["epstein", "--sample", "constant", "--rho", "0.5,1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for rho in ["0.5", "1"] {
        let obj = fs::read_to_string(dir.path().join(format!("epstein_rho_{rho}.obj"))).unwrap();
        assert!(obj.lines().any(|l| l.starts_with("v ")));
        assert!(obj.lines().any(|l| l.starts_with("f ")));
    }
    assert!(dir.path().join("epstein_metric.csv").exists());
}

#[test]
fn extremize_small_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "n = 16\namplitude = 0.1\n");
    let out = renvol(dir.path(), &["--config", &cfg, "extremize"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let log = json(&dir.path().join("extremize_log.json"));
    assert_eq!(log["converged"], serde_json::Value::Bool(true));
    assert!(dir.path().join("phi_final.csv").exists());
}

#[test]
fn unconverged_extremization_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "n = 16\namplitude = 0.3\ntol = 1e-14\nmax_iterations = 1\n");
    assert_eq!(renvol(dir.path(), &["--config", &cfg, "extremize"]).status.code(), Some(1));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(renvol(dir.path(), &["verify", "--suite", "nonsense"]).status.code(), Some(2));
    let cfg = config(dir.path(), "radius 1.0\n");
    assert_eq!(renvol(dir.path(), &["--config", &cfg, "volume"]).status.code(), Some(2));
    let cfg = config(dir.path(), "surface = ball\nradius = abc\n");
    assert_eq!(renvol(dir.path(), &["--config", &cfg, "volume"]).status.code(), Some(2));
    assert_eq!(renvol(dir.path(), &["bogus"]).status.code(), Some(2));
}
