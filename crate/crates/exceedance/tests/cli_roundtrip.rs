//! End-to-end checks of the command-line binary: deterministic outputs,
//! manifest pairing, manifest-driven re-runs, and exit codes.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_exceedance"))
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn simulate_is_deterministic_and_writes_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("y.csv");
    let status = bin()
        .args(["simulate", "--seed", "42"])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let first = read(&out);
    assert_eq!(first.lines().count(), 5000);
    let manifest_path = dir.path().join("y.csv.manifest.json");
    let manifest: serde_json::Value = serde_json::from_str(&read(&manifest_path)).unwrap();
    assert_eq!(manifest["command"], "simulate");
    assert_eq!(manifest["params"]["seed"], 42);
    assert!(manifest["wall_time_seconds"].as_f64().unwrap() >= 0.0);
    assert!(manifest.get("error").is_none());

    // identical invocation reproduces the file byte for byte
    let out2 = dir.path().join("y2.csv");
    assert!(bin()
        .args(["simulate", "--seed", "42"])
        .arg("--out")
        .arg(&out2)
        .status()
        .unwrap()
        .success());
    assert_eq!(first, read(&out2));

    // re-running from the manifest also reproduces it
    let out3 = dir.path().join("y3.csv");
    assert!(bin()
        .arg("simulate")
        .arg("--config")
        .arg(&manifest_path)
        .arg("--out")
        .arg(&out3)
        .status()
        .unwrap()
        .success());
    assert_eq!(first, read(&out3));
}

#[test]
fn zeta_table_matches_published_values() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("zt.csv");
    assert!(bin()
        .arg("zeta-table")
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap()
        .success());
    let text = read(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,d=0.5,d=1,d=1.5");
    assert_eq!(lines.len(), 14);
    assert_eq!(lines[1], "2.0,1.9,3.1,3.7");
    assert_eq!(lines[6], "3.0,13.9,17.2,14.4");
    assert_eq!(lines[13], "4.4,1188.4,1013.9,478.7");
}

#[test]
fn simulate_then_fit_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("y.csv");
    assert!(bin()
        .args(["simulate", "--seed", "42"])
        .arg("--out")
        .arg(&data)
        .status()
        .unwrap()
        .success());
    let fit_out = dir.path().join("fit.json");
    assert!(bin()
        .args(["fit", "--model", "powerzeta"])
        .arg("--input")
        .arg(&data)
        .arg("--out")
        .arg(&fit_out)
        .status()
        .unwrap()
        .success());
    let fit: serde_json::Value = serde_json::from_str(&read(&fit_out)).unwrap();
    assert!(fit["converged"].as_bool().unwrap());
    let rho = fit["params"]["rho"].as_f64().unwrap();
    let d = fit["params"]["d"].as_f64().unwrap();
    assert!((0.01..0.2).contains(&rho), "rho {rho}");
    assert!((0.5..1.95).contains(&d), "d {d}");
    assert!(!fit["profile"].as_array().unwrap().is_empty());

    // identical re-run gives a byte-identical result file
    let fit_out2 = dir.path().join("fit2.json");
    assert!(bin()
        .args(["fit", "--model", "powerzeta"])
        .arg("--input")
        .arg(&data)
        .arg("--out")
        .arg(&fit_out2)
        .status()
        .unwrap()
        .success());
    assert_eq!(read(&fit_out), read(&fit_out2));
}

#[test]
fn conditional_and_bh_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cond.json");
    assert!(bin()
        .args([
            "conditional", "--rho", "0.051", "--d", "1.48", "--sigma0", "0.135", "--y", "4",
        ])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap()
        .success());
    let report: serde_json::Value = serde_json::from_str(&read(&out)).unwrap();
    let w_central = report["w_central"].as_f64().unwrap();
    assert!((w_central - 0.12).abs() < 0.01, "w_central {w_central}");

    let out = dir.path().join("bh.json");
    assert!(bin()
        .args(["bh", "--rho", "0.056", "--d", "1.49", "--q", "0.1"])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap()
        .success());
    let report: serde_json::Value = serde_json::from_str(&read(&out)).unwrap();
    let ratio = report["ratio_at_threshold"].as_f64().unwrap();
    assert!((ratio - 0.1).abs() < 1e-6, "ratio {ratio}");
}

#[test]
fn bad_arguments_exit_2_with_error_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fit.json");
    let status = bin()
        .arg("fit") // missing --input
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    // the manifest names the failure
    let manifest: serde_json::Value =
        serde_json::from_str(&read(&dir.path().join("fit.json.manifest.json"))).unwrap();
    assert_eq!(manifest["command"], "fit");
    assert!(manifest["error"].as_str().unwrap().contains("--input"));

    let status = bin()
        .args(["zeta-table", "--grid", "bad-grid"])
        .arg("--out")
        .arg(dir.path().join("zt.csv"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}
