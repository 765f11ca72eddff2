use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conformal-mass"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON report")
}

#[test]
fn sphere_mass_is_zero() {
    let out = cli(&["mass", "--model", "sphere", "--n", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["schema"], "conformal-mass-report/1");
    assert!(r["mass"].as_f64().unwrap().abs() < 1e-8);
    for c in r["checks"].as_array().unwrap() {
        assert!(c["module"].is_string() && c["operation"].is_string());
    }
}

#[test]
fn spectral_projective_mass() {
    let out = cli(&[
        "mass",
        "--model",
        "projective",
        "--n",
        "4",
        "--method",
        "spectral",
        "--degree",
        "200",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let mass = json(&out)["mass"].as_f64().unwrap();
    assert!((mass - 1.0 / (96.0 * std::f64::consts::PI.powi(2))).abs() < 1e-4);
}

#[test]
fn series_verify_n6() {
    let out = cli(&["series-verify", "--n", "6"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    let lead = r["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "mass-derivative-leading-n6")
        .unwrap();
    assert_eq!(lead["measured"], -240.0);
    assert!(lead["detail"].as_str().unwrap().contains("-240"));
}

#[test]
fn torus_exits_with_two() {
    let out = cli(&["mass", "--model", "torus", "--n", "4"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not invertible"));
    assert!(out.stdout.is_empty());
}

#[test]
fn bad_input_exits_with_two() {
    assert_eq!(cli(&["mass", "--model", "klein", "--n", "4"]).status.code(), Some(2));
    assert_eq!(cli(&["series-verify", "--n", "5"]).status.code(), Some(2));
    assert_eq!(cli(&["mass", "--bogus"]).status.code(), Some(2));
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    fs::write(&path, r#"{"model": "sphere", "n": 4, "degre": 100}"#).unwrap();
    let out = cli(&["mass", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    fs::write(
        &path,
        r#"{"command": "mass", "model": {"model": "cylinder", "n": 4, "L": 1.0}}"#,
    )
    .unwrap();
    let out = cli(&["mass", "--config", path.to_str().unwrap(), "--L", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["model"]["L"], 2.0);
    assert!((r["mass"].as_f64().unwrap() - 1.71317e-3).abs() < 1e-8);
    // A config written for another command is refused.
    assert_eq!(
        cli(&["series-verify", "--config", path.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn failed_check_exits_with_one() {
    // An impossible tolerance fails the agreement check but still writes the report.
    let out = cli(&[
        "mass",
        "--model",
        "projective",
        "--n",
        "4",
        "--method",
        "spectral",
        "--tol",
        "1e-18",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["pass"], false);
    assert!(String::from_utf8_lossy(&out.stderr).contains("check failed"));
}

#[test]
fn dec_check_json_lists_checks() {
    let out = cli(&[
        "dec-check",
        "--n",
        "4",
        "--grid",
        "4",
        "--test",
        "star-invariance,weitzenboeck",
        "--emit",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    let names: Vec<&str> = r["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(
        names,
        ["star-invariance", "weitzenboeck-operator", "weitzenboeck-samples"]
    );
    for c in r["checks"].as_array().unwrap() {
        for key in ["name", "measured", "expected", "tolerance", "pass"] {
            assert!(c.get(key).is_some(), "{key}");
        }
    }
}

#[test]
fn oracle_compare_csv() {
    let out = cli(&[
        "oracle-compare",
        "--model",
        "cylinder",
        "--n",
        "4",
        "--L",
        "2",
        "--emit",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "method,mass,abs_delta");
    let methods: Vec<&str> = lines[1..].iter().map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(methods, ["closed-form", "expansion", "image-sum", "spectral"]);
}

#[test]
fn cylinder_length_sweep() {
    let out = cli(&[
        "sweep",
        "--model",
        "cylinder",
        "--n",
        "4",
        "--L",
        "0.5,1,2,4",
        "--emit",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 4);
    for row in rows {
        assert!(row[1].parse::<f64>().unwrap() > 0.0);
    }
}

#[test]
fn empty_sweep_is_header_only() {
    let out = cli(&["sweep", "--model", "cylinder", "--n", "4", "--L", "", "--emit", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "param,mass,method,error\n");
}

#[test]
fn projective_seed_sweep() {
    let out = cli(&[
        "sweep",
        "--model",
        "projective",
        "--n",
        "4",
        "--seeds",
        "0..20",
        "--emit",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let masses: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(masses.len(), 20);
    assert!(masses.iter().all(|m| *m >= 0.0));
}

#[test]
fn repeated_sweeps_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = |name: &str| {
        let path = dir.path().join(name);
        let out = cli(&[
            "sweep",
            "--model",
            "cylinder",
            "--n",
            "4",
            "--L",
            "2",
            "--seeds",
            "0..6",
            "--seed",
            "5",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
        fs::read(path).unwrap()
    };
    let first = args("a.json");
    assert_eq!(first, args("b.json"));
    let single = Command::new(env!("CARGO_BIN_EXE_conformal-mass"))
        .args([
            "sweep", "--model", "cylinder", "--n", "4", "--L", "2", "--seeds", "0..6", "--seed", "5",
        ])
        .env("CM_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(first, single.stdout);
}

#[test]
fn timing_is_opt_in() {
    let plain = json(&cli(&["mass", "--model", "sphere", "--n", "4"]));
    assert!(plain.get("wall_time").is_none());
    let timed = json(&cli(&["mass", "--model", "sphere", "--n", "4", "--timing"]));
    assert!(timed["wall_time"].as_f64().unwrap() >= 0.0);
}

#[test]
fn bad_thread_count_is_rejected() {
    let out = Command::new(env!("CARGO_BIN_EXE_conformal-mass"))
        .args(["mass", "--model", "sphere", "--n", "4"])
        .env("CM_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn failed_sweep_points_are_kept_per_row() {
    let out = cli(&[
        "sweep", "--model", "cylinder", "--n", "4", "--L", "1,-1", "--emit", "csv",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("1,0.0100"));
    assert!(lines[2].starts_with("-1,,closed-form,\"failed:"));
}
