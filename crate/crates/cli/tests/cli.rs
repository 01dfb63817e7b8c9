use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn qgem(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qgem"))
        .args(args)
        .output()
        .unwrap()
}

fn run_in(dir: &Path, cmd: &str, config: Option<&str>) -> Output {
    let out = dir.to_str().unwrap();
    let mut args = vec![cmd, "--out", out, "--quiet"];
    let cfg_path = dir.join("input.cfg");
    if let Some(text) = config {
        fs::create_dir_all(dir).unwrap();
        fs::write(&cfg_path, text).unwrap();
        args.push("--config");
        args.push(cfg_path.to_str().unwrap());
    }
    qgem(&args)
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn feasibility_defaults() {
    let tmp = TempDir::new().unwrap();
    let out = run_in(tmp.path(), "feasibility", None);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = json(&tmp.path().join("feasibility.json"));
    let total = report["phase_total_rad"].as_f64().unwrap();
    assert!((total - 0.015).abs() / 0.015 < 0.3, "{total}");
    assert_eq!(report["overall"], Value::Bool(true));
    let manifest = json(&tmp.path().join("manifest.json"));
    assert_eq!(manifest["subcommand"], "feasibility");
    assert_eq!(manifest["outputs"][0], "feasibility.json");
    assert_eq!(manifest["config_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn summary_is_printed_unless_quiet() {
    let tmp = TempDir::new().unwrap();
    let loud = qgem(&["phase", "--out", tmp.path().to_str().unwrap()]);
    assert!(String::from_utf8_lossy(&loud.stdout).contains("total phase"));
    let quiet = run_in(tmp.path(), "phase", None);
    assert!(quiet.stdout.is_empty());
}

#[test]
fn min_mass_flagship() {
    let tmp = TempDir::new().unwrap();
    let out = run_in(tmp.path(), "min-mass", Some("phase_target_rad = 0.01\n"));
    assert_eq!(out.status.code(), Some(0));
    let m = json(&tmp.path().join("min_mass.json"))["min_mass_fixed_N_kg"]
        .as_f64()
        .unwrap();
    assert!(m > 5e-16 && m < 2e-15, "{m}");
}

#[test]
fn infeasible_design_exits_one() {
    let tmp = TempDir::new().unwrap();
    let out = run_in(
        tmp.path(),
        "feasibility",
        Some("field_gradient_T_per_m = 100\n"),
    );
    assert_eq!(out.status.code(), Some(1));
    let report = json(&tmp.path().join("feasibility.json"));
    assert_eq!(report["overall"], Value::Bool(false));
}

#[test]
fn collision_exits_one() {
    let tmp = TempDir::new().unwrap();
    let out = run_in(tmp.path(), "trajectory", Some("N = 6\n"));
    assert_eq!(
        out.status.code(),
        Some(1),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn input_errors_exit_two() {
    assert_eq!(qgem(&["bogus"]).status.code(), Some(2));
    assert_eq!(qgem(&[]).status.code(), Some(2));

    let tmp = TempDir::new().unwrap();
    let out = run_in(tmp.path(), "feasibility", Some("N = 0.5\n"));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`N`"));

    let out = run_in(tmp.path(), "feasibility", Some("# ok\nspeed = 3\n"));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    let missing = qgem(&["phase", "--config", "/nonexistent/file.cfg", "--quiet"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let cfg = "mass_kg = 1e-15\ndt_s = 1e-3\n";
    for cmd in ["fig6", "trajectory", "witness-scan", "decoherence"] {
        assert_eq!(run_in(a.path(), cmd, Some(cfg)).status.code(), Some(0));
        assert_eq!(run_in(b.path(), cmd, Some(cfg)).status.code(), Some(0));
        let ma = json(&a.path().join("manifest.json"));
        let mb = json(&b.path().join("manifest.json"));
        assert_eq!(ma["config_sha256"], mb["config_sha256"]);
        for file in ma["outputs"].as_array().unwrap() {
            let name = file.as_str().unwrap();
            assert_eq!(
                fs::read(a.path().join(name)).unwrap(),
                fs::read(b.path().join(name)).unwrap(),
                "{cmd}: {name}"
            );
        }
    }
}

#[test]
fn equivalent_configs_share_a_hash() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    run_in(a.path(), "phase", Some("tau_ms = 500\n"));
    run_in(b.path(), "phase", Some("# same design\ntau_s = 0.5\n"));
    let ha = json(&a.path().join("manifest.json"))["config_sha256"].clone();
    let hb = json(&b.path().join("manifest.json"))["config_sha256"].clone();
    assert_eq!(ha, hb);
    let c = TempDir::new().unwrap();
    run_in(c.path(), "phase", Some("tau_s = 0.4\n"));
    assert_ne!(json(&c.path().join("manifest.json"))["config_sha256"], ha);
}

#[test]
fn figure_csv_layout() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(run_in(tmp.path(), "fig6", None).status.code(), Some(0));
    let text = fs::read_to_string(tmp.path().join("fig6.csv")).unwrap();
    let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data[0], "u,deflection");
    assert_eq!(data.len(), 52);
    assert!(text.contains("# mass_kg = 1e-15"));

    assert_eq!(run_in(tmp.path(), "fig5", None).status.code(), Some(0));
    let t4 = fs::read_to_string(tmp.path().join("fig5_T4K.csv")).unwrap();
    assert!(t4.lines().any(|l| l == "n_V,exponent,limit,pass"));
}
