use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_aerocov");

fn aerocov(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

const SMALL_VALIDATE: &str = r#"{
  "scenario": {"fixture": {"name": "table2", "row": "three-tier"}},
  "validate": {"z": [300], "gamma_db": -15, "trials": 1500, "seed": 11}
}"#;

#[test]
fn fixtures_listing() {
    let out = aerocov(&["fixtures"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("name,kind,rows\n"));
    assert!(text.contains("table3,table,one-tier;two-tier;three-tier;five-tier"));
}

#[test]
fn fixture_json_round_trips() {
    let out = aerocov(&["fixtures", "table2"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 5);
    assert_eq!(aerocov(&["fixtures", "table9"]).status.code(), Some(2));
}

#[test]
fn validate_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "v.json", SMALL_VALIDATE);
    let csv = dir.path().join("run/v.csv");
    let out = aerocov(&["validate", "--config", &cfg, "--out", csv.to_str().unwrap()]);
    assert!(matches!(out.status.code(), Some(0) | Some(4)), "{out:?}");
    let body = std::fs::read_to_string(&csv).unwrap();
    assert!(body.starts_with("quantity,z_u,tier,class,param,analytic,mc,half_width_95,gap,tolerance,pass\n"));
    assert_eq!(body.lines().count(), 1 + 6 + 6 + 3 + 1);
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("run/v.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seeds"][0], 11);
    assert_eq!(manifest["rows"], 16);
    assert_eq!(manifest["provenance"][1]["mc_trials"], 1500);
    assert_eq!(manifest["config_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn seed_flag_changes_simulated_columns_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "v.json", SMALL_VALIDATE);
    let a = aerocov(&["validate", "--config", &cfg, "--seed", "1"]).stdout;
    let b = aerocov(&["validate", "--config", &cfg, "--seed", "2"]).stdout;
    assert_ne!(a, b);
    let col = |bytes: &[u8], i: usize| -> Vec<String> {
        String::from_utf8(bytes.to_vec())
            .unwrap()
            .lines()
            .skip(1)
            .filter(|l| l.starts_with("association") || l.starts_with("coverage"))
            .map(|l| l.split(',').nth(i).unwrap().to_string())
            .collect()
    };
    assert_eq!(col(&a, 5), col(&b, 5));
}

#[test]
fn failed_checks_exit_4() {
    // a single trial with zero tolerance cannot match every analytic value
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "t.json",
        r#"{"scenario": {"fixture": {"name": "table2", "row": "three-tier"}},
            "validate": {"z": [0], "gamma_db": -15, "trials": 1, "seed": 0,
                         "tolerances": {"coverage": 0, "ks": 0, "association": 0, "laplace": 0}}}"#,
    );
    let out = aerocov(&["validate", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8(out.stdout).unwrap().contains(",false\n"));
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad_key = write(
        dir.path(),
        "a.json",
        "{\"scenario\": {\"fixture\": {\"name\": \"fig3\"}},\n \"overall\": {\"gamma_db\": -8, \"metod\": \"x\"}}",
    );
    let out = aerocov(&["overall", "--config", &bad_key]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("metod") && err.contains("line 2"), "{err}");

    let empty = write(
        dir.path(),
        "b.json",
        r#"{"scenario": {"fixture": {"name": "fig3"}}, "local_curve": {"z": [], "gamma_db": -8}}"#,
    );
    assert_eq!(aerocov(&["local-curve", "--config", &empty]).status.code(), Some(2));
    assert_eq!(aerocov(&["overall", "--config", &empty]).status.code(), Some(2));
    assert_eq!(aerocov(&["overall"]).status.code(), Some(2));
    assert_eq!(
        aerocov(&["overall", "--config", "/nonexistent/x.json"]).status.code(),
        Some(1)
    );
}

#[test]
fn scenario_from_file() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "sc.json",
        r#"{"users": {"lambda_u": 1e-3, "beta_u": 5e-3},
            "channel": {"alpha_los": 2, "alpha_nlos": 3, "eta_los_db": 0, "eta_nlos_db": -20,
                        "m_los": 2, "m_nlos": 1, "noise_w": 1e-7, "env_a": 4.88, "env_b": 0.429},
            "tiers": [{"altitude_m": 100, "lambda": 4e-5, "beta": 3.2e-3, "power_dbm": 7}],
            "region_radius_m": 2820.95}"#,
    );
    let cfg = write(
        dir.path(),
        "exp.json",
        r#"{"scenario": {"file": "sc.json"}, "local_curve": {"z_range": {"start": 0, "stop": 1000, "step": 500}, "gamma_db": -15}}"#,
    );
    let out = aerocov(&["local-curve", "--config", &cfg, "--method", "exact"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let values: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert_eq!(values.len(), 3);
    assert!(values.windows(2).all(|w| w[1] <= w[0] + 1e-6), "{values:?}");
    let manifest: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(manifest["provenance"][0]["method"], "exact");
}

#[test]
fn infeasible_optimization_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "o.json",
        r#"{"scenario": {"fixture": {"name": "fig3"}},
            "optimize": {"gamma1_db": -8, "gamma2_db": -20, "n_max": 1,
                         "grid": {"min": 1e-3, "max": 1e-2, "points": 2}}}"#,
    );
    let out = aerocov(&["optimize", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("every grid point"));
}

#[test]
fn optimize_slice_rises_then_falls() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "s.json",
        r#"{"scenario": {"fixture": {"name": "fig3"}},
            "optimize": {"gamma1_db": -8, "gamma2_db": -20, "n_max": 1000,
                         "axes": [[1e-5, 3e-4, 2e-3, 2e-2, 1e-1], [1e-2]]}}"#,
    );
    let out = aerocov(&["optimize", "--config", &cfg]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let vi = header.iter().position(|h| *h == "value").unwrap();
    let values: Vec<f64> = lines.map(|l| l.split(',').nth(vi).unwrap().parse().unwrap()).collect();
    let peak = values.iter().cloned().fold(f64::MIN, f64::max);
    assert!(values[0] < peak && values[4] < peak, "{values:?}");
}
