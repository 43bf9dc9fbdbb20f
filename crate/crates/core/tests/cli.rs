//! End-to-end checks of the `nld` binary: exit codes, output layout,
//! reproducibility, and the CSV-loaded kernel/resource paths.

use std::path::Path;
use std::process::Command;

fn nld() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nld"))
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

const SOLVE_CONFIG: &str = r#"{
  "schema_version": 1,
  "domain": {"kind": "interval", "lo": 0.0, "hi": 1.0},
  "kernel": {"kind": "uniform", "radius": 0.05},
  "resource": {"family": "example2", "x0": "near_boundary"},
  "d": 50.0,
  "seed": 7
}"#;

#[test]
fn solve_writes_run_directory_and_exits_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("config.json");
    write(&cfg, SOLVE_CONFIG);
    let out = tmp.path().join("run");
    let status = nld()
        .args(["solve", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    for f in ["config.json", "report.json", "theta.csv"] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["command"], "solve");
    assert_eq!(report["all_checks_passed"], true);
    assert!(report["csv_schemas"]["theta.csv"].is_array());
    // theta.csv carries one row per active cell plus the header
    let theta = std::fs::read_to_string(out.join("theta.csv")).unwrap();
    let cells = report["results"]["active_cells"].as_u64().unwrap() as usize;
    assert_eq!(theta.lines().count(), cells + 1);
}

#[test]
fn identical_config_and_seed_reproduce_outputs_byte_for_byte() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("config.json");
    write(&cfg, SOLVE_CONFIG);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for out in [&a, &b] {
        assert!(nld()
            .args(["solve", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(out)
            .status()
            .unwrap()
            .success());
    }
    let csv_a = std::fs::read(a.join("theta.csv")).unwrap();
    let csv_b = std::fs::read(b.join("theta.csv")).unwrap();
    assert_eq!(csv_a, csv_b);
    // reports match exactly outside the wall-clock section
    let mut ra: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(a.join("report.json")).unwrap()).unwrap();
    let mut rb: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(b.join("report.json")).unwrap()).unwrap();
    ra.as_object_mut().unwrap().remove("timings_ms");
    rb.as_object_mut().unwrap().remove("timings_ms");
    assert_eq!(ra, rb);
}

#[test]
fn nonpositive_d_is_a_config_error_with_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("config.json");
    write(&cfg, &SOLVE_CONFIG.replace("\"d\": 50.0", "\"d\": -1.0"));
    let status = nld()
        .args(["solve", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(tmp.path().join("run"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn unknown_command_and_malformed_config_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("config.json");
    write(&cfg, SOLVE_CONFIG);
    let status = nld()
        .args(["frobnicate", "--config"])
        .arg(&cfg)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    let bad = tmp.path().join("bad.json");
    write(&bad, "{\"schema_version\": 1");
    let status = nld().args(["solve", "--config"]).arg(&bad).status().unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn solver_failure_exits_3() {
    // Dirichlet at large d leaks too much mass: no positive steady state
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("config.json");
    write(
        &cfg,
        r#"{
  "schema_version": 1,
  "domain": {"kind": "interval", "lo": 0.0, "hi": 1.0},
  "kernel": {"kind": "uniform", "radius": 1.0},
  "boundary_condition": "dirichlet",
  "grid": {"cells_per_axis": 48},
  "resource": {"family": "smooth", "profile": "raised_cosine"},
  "d": 500.0
}"#,
    );
    let out = nld()
        .args(["solve", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(tmp.path().join("run"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no positive steady state"));
}

#[test]
fn tabulated_kernel_and_csv_resource_load_relative_to_config() {
    let tmp = tempfile::tempdir().unwrap();
    // triangle profile with unit 1D mass
    write(&tmp.path().join("kernel.csv"), "radius,value\n0.0,1.0\n1.0,0.0\n");
    let n = 32;
    let mut rows = String::new();
    for i in 0..n {
        let x = (i as f64 + 0.5) / n as f64;
        rows.push_str(&format!("{i},{}\n", 1.0 + x));
    }
    write(&tmp.path().join("resource.csv"), &rows);
    let cfg = tmp.path().join("config.json");
    write(
        &cfg,
        r#"{
  "schema_version": 1,
  "domain": {"kind": "interval", "lo": 0.0, "hi": 1.0},
  "kernel": {"kind": "tabulated", "path": "kernel.csv"},
  "grid": {"cells_per_axis": 32},
  "resource": {"family": "csv", "path": "resource.csv"},
  "d": 0.5
}"#,
    );
    let out = tmp.path().join("run");
    let output = nld()
        .args(["mu0", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(
        output.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    // mu0 >= mean of m > 1 for this resource
    assert!(report["results"]["mu0"].as_f64().unwrap() > 1.0);
    assert!(out.join("eigenfield.csv").exists());
}

#[test]
fn selftest_passes_on_defaults() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("config.json");
    write(
        &cfg,
        r#"{
  "schema_version": 1,
  "domain": {"kind": "interval", "lo": 0.0, "hi": 1.0},
  "kernel": {"kind": "uniform", "radius": 1.0},
  "resource": {"family": "smooth", "profile": "raised_cosine"},
  "seed": 42
}"#,
    );
    let status = nld()
        .args(["selftest", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(tmp.path().join("run"))
        .status()
        .unwrap();
    assert!(status.success());
}
