use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_modelspace"))
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn run(args: &[&str], config: &Path, out: Option<&Path>) -> Output {
    let mut cmd = bin();
    cmd.args(args).arg("--config").arg(config);
    if let Some(o) = out {
        cmd.arg("--out").arg(o);
    }
    cmd.output().unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

const Z2_CLARK: &str = r#"{"inner": {"blaschke_zeros": [{"re": 0, "im": 0, "mult": 2}]}, "clark_alpha": {"re": 1, "im": 0}}"#;

#[test]
fn analyze_clark_measure_is_isometric() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.json", Z2_CLARK);
    let out = dir.path().join("out");
    let o = run(&["analyze"], &cfg, Some(&out));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let b = read_json(&out.join("analyze.json"));
    for s in b["spectral"]["singular_values"].as_array().unwrap() {
        assert!((s.as_f64().unwrap() - 1.0).abs() < 1e-8);
    }
    let prov = &b["provenance"];
    assert_eq!(prov["convention"], "lenE");
    assert_eq!(prov["config_sha256"].as_str().unwrap().len(), 64);
    assert_eq!(b["exit_code"], 0);
}

#[test]
fn analyze_spiral_point_mass_fails_with_witness() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"inner": {"generator": {"name": "spiral_dyadic", "params": {"phase": 1.0}, "truncation": 12}},
            "measure": {"atoms": [{"re": 1, "im": 0, "mass": 1}]},
            "params": {"criteria": ["volberg_treil"], "depth": 12}}"#,
    );
    let o = run(&["analyze"], &cfg, None);
    assert_eq!(o.status.code(), Some(2));
    let b: Value = serde_json::from_slice(&o.stdout).unwrap();
    let rep = &b["reports"][0];
    assert_eq!(rep["verdict"], "fails_with_witness");
    let w = &rep["witness"];
    assert!(w["ratio"].as_f64().unwrap() > w["threshold"].as_f64().unwrap());
}

#[test]
fn analyze_empty_measure_is_trivial() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"inner": {"blaschke_zeros": [{"re": 0.3, "im": 0.2}]}}"#);
    let o = run(&["analyze"], &cfg, None);
    assert_eq!(o.status.code(), Some(0));
    let b: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(b["reports"].as_array().unwrap().iter().all(|r| r["verdict"] == "holds_at_resolution"));
    assert!(b["spectral"]["operator_norm"].as_f64().unwrap() == 0.0);
}

#[test]
fn analyze_inconclusive_only_exits_3() {
    let dir = TempDir::new().unwrap();
    // Boundary mass on the accumulation point defeats the Schatten test.
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"inner": {"generator": {"name": "radial_dyadic", "params": {"angle": 0.0}, "truncation": 4}},
            "measure": {"atoms": [{"re": 1, "im": 0, "mass": 1}]},
            "params": {"criteria": ["thm14"]}}"#,
    );
    let o = run(&["analyze"], &cfg, None);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"inner": {"blaschke_zeros": [{"re": 0.5, "im": 0.1}, {"re": -0.2, "im": 0.6}]},
            "measure": {"atoms": [{"re": 0.9, "im": 0.0, "mass": 0.3}], "boundary_density": [{"start": 0.0, "end": 1.0, "density": 2.0}]},
            "params": {"p": 3, "n": 1, "seed": 7, "samples": 16}}"#,
    );
    for cmd in ["analyze", "gram", "decompose", "levelset"] {
        let a = run(&[cmd, "--tol", "1e-3"], &cfg, None);
        let b = run(&[cmd, "--tol", "1e-3"], &cfg, None);
        assert_eq!(a.status.code(), b.status.code(), "{cmd}");
        assert!(a.status.code().is_some_and(|c| c != 1), "{cmd}: {}", String::from_utf8_lossy(&a.stderr));
        assert_eq!(a.stdout, b.stdout, "{cmd}");
    }
}

#[test]
fn flags_override_config() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.json", Z2_CLARK);
    let o = run(&["gram", "--r", "1,2,4", "--epsilon", "0.25"], &cfg, None);
    assert_eq!(o.status.code(), Some(0));
    let g: Value = serde_json::from_slice(&o.stdout).unwrap();
    let schatten = g["schatten"].as_object().unwrap();
    assert_eq!(schatten.len(), 3);
    assert!((schatten["1"].as_f64().unwrap() - 2.0).abs() < 1e-8);
    assert_eq!(g["provenance"]["epsilon"], 0.25);
    assert_eq!(g["gram"].as_array().unwrap().len(), 2);
    let base = run(&["gram"], &cfg, None);
    let h0: Value = serde_json::from_slice(&base.stdout).unwrap();
    assert_ne!(h0["provenance"]["config_sha256"], g["provenance"]["config_sha256"]);
}

#[test]
fn levelset_cells_hug_the_level_curve() {
    let dir = TempDir::new().unwrap();
    for (mult, radius) in [(1u32, 0.5f64), (4, 0.5f64.powf(0.25))] {
        let cfg =
            write_config(dir.path(), "c.json", &format!(r#"{{"inner": {{"blaschke_zeros": [{{"re": 0, "im": 0, "mult": {mult}}}]}}}}"#));
        let o = run(&["levelset", "--tol", "0.01"], &cfg, None);
        assert_eq!(o.status.code(), Some(0));
        let text = String::from_utf8(o.stdout).unwrap();
        let rows: Vec<Vec<f64>> = text
            .lines()
            .filter(|l| !l.starts_with('#') && !l.starts_with('x'))
            .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
            .collect();
        assert!(rows.len() > 50);
        for r in &rows {
            let rho = r[0].hypot(r[1]);
            assert!((rho - radius).abs() <= r[2], "cell at {rho} for radius {radius}");
        }
    }
}

#[test]
fn decompose_writes_whitney_csv() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"inner": {"blaschke_zeros": [{"re": 0, "im": 0}]}}"#);
    let out = dir.path().join("o");
    let o = run(&["decompose"], &cfg, Some(&out));
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(out.join("whitney.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert!(lines[0].starts_with('#') && lines[0].contains("lenE"));
    assert_eq!(lines[1], "k,start_angle,end_angle,d_lo,d_hi,threshold_exact");
    assert_eq!(lines.len() - 2, 51);
    assert_eq!(lines.iter().filter(|l| l.ends_with(",true")).count(), 50);
}

#[test]
fn errors_exit_1_with_diagnostics() {
    let dir = TempDir::new().unwrap();
    let cases = [
        ("{\n  \"inner\": {},\n  \"params\": {\"depth\": -3}\n}", "params.depth"),
        (r#"{"inner": {}, "measure": {"atoms": [{"re": 2.0, "im": 0, "mass": 1}]}}"#, "measure"),
        (r#"{"inner": {}, "params": {"p": 3, "n": 1}}"#, "params.seed"),
        (r#"{"inner": {"singular_atoms": [{"angle": 1.0, "mass": 0.5}]}}"#, "finite Blaschke"),
    ];
    for (body, needle) in cases {
        let cfg = write_config(dir.path(), "c.json", body);
        let o = run(&["gram"], &cfg, None);
        assert_eq!(o.status.code(), Some(1), "{body}");
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains(needle), "{err}");
    }
    let o = bin().args(["analyze", "--bogus"]).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
}
