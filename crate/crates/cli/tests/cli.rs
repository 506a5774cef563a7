use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn gaussent(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gaussent"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .skip(1)
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

#[test]
fn sweep_layout_and_argmax() {
    let out = gaussent(&["sweep"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "u2,log_neg,geof");
    assert_eq!(lines.len(), 1 + 161 + 1);
    assert_eq!(lines[1].split(',').next(), Some("1.00000000e0"));
    assert_eq!(
        *lines.last().unwrap(),
        "# argmax log_neg: u2 = 3.00000000e0; argmax geof: u2 = 3.00000000e0"
    );
    for r in rows(&text) {
        assert_eq!(r.len(), 3);
        for cell in &r {
            assert!(!cell.is_empty());
            cell.parse::<f64>().unwrap();
        }
    }
}

#[test]
fn sweep_is_byte_deterministic() {
    let args = [
        "sweep", "--u-min", "1", "--u-max", "5", "--u-step", "0.25", "--seed", "7",
    ];
    let a = gaussent(&args);
    let b = gaussent(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn sweep_identity_channel_is_flat() {
    let out = gaussent(&["sweep", "--theta", "0", "--u-step", "0.5"]);
    assert_eq!(code(&out), 0);
    let rows = rows(&stdout(&out));
    for r in &rows {
        assert_eq!(r[1], rows[0][1]);
        assert_eq!(r[2], rows[0][2]);
    }
}

#[test]
fn sweep_full_loss_is_zero() {
    let theta = std::f64::consts::FRAC_PI_2.to_string();
    let out = gaussent(&["sweep", "--theta", &theta, "--u-step", "0.5"]);
    assert_eq!(code(&out), 0);
    for r in rows(&stdout(&out)) {
        assert_eq!(r[1].parse::<f64>().unwrap(), 0.0);
        assert!(r[2].parse::<f64>().unwrap().abs() < 1e-12);
    }
}

#[test]
fn probe_at_matched_squeezing_reports_equality() {
    let out = gaussent(&["probe", "--u2", "3"]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["verdict"], "equality");
    assert_eq!(v["measure"], "geof");
    assert!(v["gap"].as_f64().unwrap().abs() < 1e-12);
}

#[test]
fn probe_tight_tolerance_sees_strict_inequality() {
    let out = gaussent(&["probe", "--u2", "1", "--tol", "1e-6"]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["verdict"], "strict-inequality");
}

#[test]
fn probe_exit_codes() {
    let theta = std::f64::consts::FRAC_PI_2.to_string();
    assert_eq!(code(&gaussent(&["probe", "--theta", &theta])), 4);
    assert_eq!(code(&gaussent(&["probe", "--measure", "logneg"])), 2);
    assert_eq!(code(&gaussent(&["probe", "--q", "1.5"])), 2);
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    fs::write(
        &path,
        r#"{"channel": {"theta": 0.3, "u3": 2.0}, "input": {"q_prime": [0.5]}, "seed": 11}"#,
    )
    .unwrap();
    let p = path.to_str().unwrap();
    let out = gaussent(&["probe", "--config", p, "--u3", "1.5"]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["config"]["theta"], 0.3);
    assert_eq!(v["config"]["u3"], 1.5);
    assert_eq!(v["config"]["seed"], 11);
    assert_eq!(v["config"]["b3"], 1.0);

    fs::write(&path, r#"{"channel": {"theta": 0.3, "spin": 1}}"#).unwrap();
    assert_eq!(code(&gaussent(&["probe", "--config", p])), 2);
    fs::write(&path, r#"{"colour": "red"}"#).unwrap();
    assert_eq!(code(&gaussent(&["sweep", "--config", p])), 2);
}

#[test]
fn verify_selectors() {
    let out = gaussent(&["verify", "--suite", "theorem1,eq10"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("== theorem1"));
    assert!(text.contains("== eq10"));
    assert!(text.lines().any(|l| l.trim_start().starts_with("PASS")));
    assert!(text.ends_with("all checks passed\n"));
    assert!(!text.lines().any(|l| l.trim_start().starts_with("FAIL")));
    assert_eq!(code(&gaussent(&["verify", "--suite", "bogus"])), 2);
    assert_eq!(code(&gaussent(&["verify"])), 2);
}

#[test]
fn optimize_batch_finds_matched_squeezing() {
    let out = gaussent(&["optimize", "--qprime", "0.3,0.6,0.9"]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let optima = v["optima"].as_array().unwrap();
    assert_eq!(optima.len(), 6);
    for o in optima {
        assert!((o["u_star"].as_f64().unwrap() - 3.0).abs() < 1e-9, "{o}");
    }
}

#[test]
fn optimize_identity_channel_prefers_no_squeezing() {
    let out = gaussent(&["optimize", "--theta", "0", "--measure", "logneg"]);
    assert_eq!(code(&out), 0);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let optima = v["optima"].as_array().unwrap();
    assert_eq!(optima.len(), 1);
    assert_eq!(optima[0]["u_star"], 1.0);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let args = ["sweep", "--u-step", "1", "--out", path.to_str().unwrap()];
    let out = gaussent(&args);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let direct = gaussent(&args[..3]);
    assert_eq!(fs::read(&path).unwrap(), direct.stdout);
}

#[test]
fn oracle_check_passes_for_a_mild_ancilla() {
    let out = gaussent(&[
        "oracle-check",
        "--u3",
        "1.2",
        "--b3",
        "0.75",
        "--qprime",
        "0.4",
    ]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let text = stdout(&out);
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 2);
}

#[test]
fn oracle_check_reports_unresolvable_truncation() {
    let out = gaussent(&["oracle-check", "--cutoff", "20"]);
    assert_eq!(code(&out), 1);
    let text = stdout(&out);
    assert!(text
        .lines()
        .any(|l| l.starts_with("FAIL") && l.contains("truncation")));
}
