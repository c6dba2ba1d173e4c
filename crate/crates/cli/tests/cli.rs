use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str], seed_env: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_dispersive-kit"));
    cmd.args(args).env_remove("DISPERSIVE_KIT_SEED");
    if let Some(s) = seed_env {
        cmd.env("DISPERSIVE_KIT_SEED", s);
    }
    cmd.output().expect("binary runs")
}

fn configs(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name).display().to_string()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn t1_synth_writes_trace_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("t1");
    let o = run(&["synth", "--config", &configs("t1.json"), "--out", p(&out)], None);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("t1.csv")).unwrap();
    assert_eq!(csv.lines().count(), 201);
    let m = manifest(&out);
    assert_eq!(m["command"], "synth");
    assert_eq!(m["seed"], 1);
    assert_eq!(m["outputs"], serde_json::json!(["t1.csv"]));
}

#[test]
fn seed_resolution_order() {
    let tmp = tempfile::tempdir().unwrap();
    let dirs: Vec<PathBuf> = (0..4).map(|k| tmp.path().join(format!("r{k}"))).collect();
    let cfg = configs("t1.json");
    assert!(run(&["synth", "--config", &cfg, "--out", p(&dirs[0])], None).status.success());
    assert!(run(&["synth", "--config", &cfg, "--out", p(&dirs[1])], Some("99")).status.success());
    assert!(run(&["--seed", "5", "synth", "--config", &cfg, "--out", p(&dirs[2])], Some("99")).status.success());
    assert!(run(&["synth", "--config", &cfg, "--out", p(&dirs[3])], Some("99")).status.success());
    let seeds: Vec<u64> = dirs.iter().map(|d| manifest(d)["seed"].as_u64().unwrap()).collect();
    assert_eq!(seeds, [1, 99, 5, 99]);
    let read = |d: &PathBuf| std::fs::read(d.join("t1.csv")).unwrap();
    assert_ne!(read(&dirs[0]), read(&dirs[1]));
    assert_eq!(read(&dirs[1]), read(&dirs[3]));
    let bad = run(&["synth", "--config", &cfg, "--out", p(&tmp.path().join("bad"))], Some("minus one"));
    assert!(!bad.status.success());
}

#[test]
fn empty_input_directory_is_a_no_data_error() {
    let tmp = tempfile::tempdir().unwrap();
    let empty = tmp.path().join("empty");
    std::fs::create_dir(&empty).unwrap();
    let o = run(&["analyze", "coherence", "--input", p(&empty), "--out", p(&tmp.path().join("out"))], None);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no"), "{}", String::from_utf8_lossy(&o.stderr));
    let o = run(&["report", "--input", p(&empty), "--out", p(&tmp.path().join("rep"))], None);
    assert!(!o.status.success());
}

#[test]
fn invalid_config_reports_field() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.json");
    std::fs::write(&cfg, r#"{"kind": "decay", "experiment": "t1", "params": {"t_us": -3, "amplitude": 0.9, "offset": 0.05}, "delays": {"start_us": 0, "step_us": 1, "n": 10}, "noise_sigma": 0.0}"#).unwrap();
    let o = run(&["synth", "--config", p(&cfg), "--out", p(&tmp.path().join("o"))], None);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("t_us"));
}

#[test]
fn band_defaults_and_grid_map() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("band");
    let o = run(&["predict-band", "--out", p(&out), "--grid", "10", "--spacing", "2"], None);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let band: Value = serde_json::from_str(&std::fs::read_to_string(out.join("band.json")).unwrap()).unwrap();
    assert!((band["delta_p_mm"].as_f64().unwrap() - 0.70).abs() < 0.01);
    assert!((band["omega_p_GHz"].as_f64().unwrap() - 35.9).abs() < 0.1);
    let mut reader = csv::Reader::from_path(out.join("coupling_map.csv")).unwrap();
    assert_eq!(reader.headers().unwrap().len(), 100);
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 100);
    assert!(rows.iter().all(|r| r.len() == 100));
    assert!(manifest(&out)["outputs"].as_array().unwrap().iter().any(|v| v == "coupling_map.csv"));
}

#[test]
fn band_rejects_fat_pillars() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("lattice.json");
    std::fs::write(&cfg, r#"{"a_mm": 2.0, "r_mm": 1.0, "layers": [{"thickness_um": 600, "permittivity": 4}], "c_factor": 1.31}"#).unwrap();
    let o = run(&["predict-band", "--config", p(&cfg), "--out", p(&tmp.path().join("o"))], None);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).to_lowercase().contains("geometry"));
}

#[test]
fn alpha_table_through_corr_rb_and_report() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("corr");
    let o = run(&["analyze", "corr-rb", "--input", &configs("alpha_table.json"), "--out", p(&out)], None);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(out.join("corr_rb.json")).unwrap()).unwrap();
    let eta = r["eta_tilde"].as_f64().unwrap();
    assert!(eta > 0.5e-4 && eta < 1.65e-4, "{eta}");
    let rep = tmp.path().join("report");
    let o = run(&["report", "--input", p(&out), "--out", p(&rep)], None);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let md = std::fs::read_to_string(rep.join("report.md")).unwrap();
    assert!(md.contains("1111"));
    assert!(rep.join("manifest.json").exists());
}
