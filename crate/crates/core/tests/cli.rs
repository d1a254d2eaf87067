use std::fs;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_obscon");

fn obscon(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(obscon(&["--help"]).status.code(), Some(0));
    assert_eq!(obscon(&["--version"]).status.code(), Some(0));
}

#[test]
fn bad_input_exits_one() {
    assert_eq!(obscon(&["no-such-command"]).status.code(), Some(1));
    let out = obscon(&["table1", "--delta", "0.7"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("delta"));
    assert_eq!(obscon(&["functional", "--domain", "sphere"]).status.code(), Some(1));
}

#[test]
fn selftest_passes() {
    let out = obscon(&["selftest"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn no_timing_json_is_deterministic() {
    let args = ["optimize", "--N", "8", "--L", "0.3", "--mesh", "200", "--no-timing", "--format", "json"];
    let a = obscon(&args);
    let b = obscon(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(!String::from_utf8_lossy(&a.stdout).contains("wall_time"));
}

#[test]
fn full_precision_csv_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let out = obscon(&[
        "table1", "--eps", "0.5", "--delta", "0.2", "--precision", "full", "--out", path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = fs::read_to_string(&path).unwrap();
    let cell = text.lines().nth(1).unwrap().split(',').nth(1).unwrap();
    let value: f64 = cell.parse().unwrap();
    assert_eq!(value.to_string(), cell);
    assert!((value - 0.5).abs() < 1e-3);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    let out_path = dir.path().join("f.json");
    fs::write(&cfg, "domain = \"interval\"\nsubset = \"half\"\nN = 4\nmesh = 400\ntiming = false\n").unwrap();
    let out = obscon(&["functional", "--config", cfg.to_str().unwrap(), "--N", "6", "--out", out_path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(report["per_mode_mass"].as_array().unwrap().len(), 6);
    assert!(dir.path().join("f.masses.dat").exists());

    fs::write(&cfg, "colour = \"blue\"\n").unwrap();
    assert_eq!(obscon(&["functional", "--config", cfg.to_str().unwrap()]).status.code(), Some(1));
}
