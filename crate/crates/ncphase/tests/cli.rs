use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn ncphase(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ncphase"))
        .args(args)
        .env("NCPHASE_THREADS", "1")
        .output()
        .expect("spawn ncphase")
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn derive_prints_lambda_plus() {
    let v = stdout_json(&ncphase(&["derive", "--hbar", "1", "--theta", "2"]));
    let lp = v["lambda_plus"].as_f64().unwrap();
    assert!((lp - (1.0 + 2f64.sqrt())).abs() < 1e-12, "{lp}");
    let lm = v["lambda_minus"].as_f64().unwrap();
    assert!((lp * lm - 1.0).abs() < 1e-12);
}

#[test]
fn derive_rejects_zero_hbar() {
    let out = ncphase(&["derive", "--hbar", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn dynamics_at_zero_time_is_identity() {
    let v = stdout_json(&ncphase(&["dynamics", "--t", "0", "--theta", "0.3"]));
    let rows = v["a_t"].as_array().unwrap();
    for (i, row) in rows.iter().enumerate() {
        for (j, x) in row.as_array().unwrap().iter().enumerate() {
            assert_eq!(x.as_f64().unwrap(), if i == j { 1.0 } else { 0.0 });
        }
    }
}

#[test]
fn wigner_marginal_hbar0_peak() {
    let out = ncphase(&["wigner", "--family", "marginal-hbar0", "--theta", "0.5", "--at", "0,0"]);
    assert!(out.status.success());
    let v: f64 = String::from_utf8(out.stdout).unwrap().trim().parse().unwrap();
    // 1/(π m²ω²θ)
    assert!((v - 1.0 / (std::f64::consts::PI * 0.5)).abs() < 1e-12, "{v}");
}

#[test]
fn wigner_rejects_short_center() {
    let out = ncphase(&["wigner", "--family", "four-d", "--center", "1,2,3", "--theta", "0.1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = ncphase(&["derive", "--planck", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_config_writes_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let outputs = tmp.path().join("out");
    let body = format!(r#"{{"outputs": {:?}, "experiments": ["appendix"],"#, outputs.to_str().unwrap());
    let cfg = write_config(tmp.path(), &body);
    let out = ncphase(&["run", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!outputs.exists());

    let body = format!(r#"{{"outputs": {:?}, "experiments": ["appendix"], "colour": 3}}"#, outputs.to_str().unwrap());
    let cfg = write_config(tmp.path(), &body);
    let out = ncphase(&["run", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));
    assert!(!outputs.exists());
}

#[test]
fn appendix_run_writes_eighteen_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let outputs = tmp.path().join("out");
    let body = format!(r#"{{"outputs": {:?}, "experiments": ["appendix"]}}"#, outputs.to_str().unwrap());
    let cfg = write_config(tmp.path(), &body);
    let out = ncphase(&["run", "--config", &cfg]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_str(&fs::read_to_string(outputs.join("appendix/report.json")).unwrap()).unwrap();
    let reports = report["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 18);
    assert!(reports.iter().all(|r| r["verdict"] == "converged"));
    let csv = fs::read_to_string(outputs.join("appendix/errors.csv")).unwrap();
    assert!(csv.starts_with("experiment,stage,step,parameter,value,fixed,error"));
}

fn read_tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        if p.is_dir() {
            out.extend(read_tree(&p));
        } else {
            out.push((p.display().to_string(), fs::read(&p).unwrap()));
        }
    }
    out.sort();
    out
}

#[test]
fn runs_are_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let outputs = tmp.path().join("out");
    let body = format!(
        r#"{{
            "outputs": {:?},
            "quadrature": {{"kind": "gauss_hermite_tensor", "order_per_axis": 8}},
            "probes": {{"count": 12}},
            "experiments": ["localization", "wigner_marginal", "isometry", "unitality", "oracle"]
        }}"#,
        outputs.to_str().unwrap()
    );
    let cfg = write_config(tmp.path(), &body);
    let first = ncphase(&["run", "--config", &cfg]);
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stderr));
    let a = read_tree(&outputs);
    assert!(a.iter().any(|(p, _)| p.ends_with("heatmap.svg")));
    let second = ncphase(&["run", "--config", &cfg]);
    assert!(second.status.success());
    assert_eq!(a, read_tree(&outputs));
}

#[test]
fn heatmap_renders_a_wigner_grid() {
    let tmp = tempfile::tempdir().unwrap();
    let grid = tmp.path().join("grid.csv");
    let svg = tmp.path().join("map.svg");
    let out = ncphase(&[
        "wigner",
        "--family",
        "marginal",
        "--hbar",
        "0.5",
        "--theta",
        "0.2",
        "--points",
        "21",
        "--out",
        grid.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = fs::read_to_string(&grid).unwrap();
    assert_eq!(text.lines().count(), 1 + 21 * 21);
    let out = ncphase(&["heatmap", "--input", grid.to_str().unwrap(), "--output", svg.to_str().unwrap(), "--title", "m"]);
    assert!(out.status.success());
    let s = fs::read_to_string(&svg).unwrap();
    assert!(s.starts_with("<svg") || s.starts_with("<?xml"));
    assert!(s.matches("<rect").count() >= 21 * 21);
}

#[test]
fn noncommutation_sweep_reports_the_gap() {
    let v = stdout_json(&ncphase(&["sweep", "--experiment", "noncommutation", "--order", "12", "--count", "20"]));
    let r = &v.as_array().unwrap()[0];
    assert_eq!(r["verdict"], "converged");
    assert!(r["metrics"]["gap_at_center"].as_f64().unwrap() >= 0.9);
}

#[test]
fn asymptotic_ratio_tends_to_one() {
    let v = stdout_json(&ncphase(&[
        "asymptotics",
        "--quantity",
        "lambda-plus",
        "--direction",
        "hbar-to-0",
        "--hbar",
        "1e-5",
        "--theta",
        "1",
    ]));
    assert!((v["ratio"].as_f64().unwrap() - 1.0).abs() < 1e-8);
}

#[test]
fn smooth_constant_is_one() {
    let out = ncphase(&["smooth", "--function", "constant", "--theta", "0.3", "--count", "5", "--order", "6"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let mut n = 0;
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let v: f64 = rec[4].parse().unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        n += 1;
    }
    assert_eq!(n, 5);
}
