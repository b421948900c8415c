//! End-to-end runs of the compiled binary: exit codes, formats, round trips.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sblat"))
}

fn write_tmp(name: &str, text: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join("sblat-cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const GENUS0: &str = r#"{
  "curve": { "branch_points": [[1.0, 0.0], [4.0, 0.0]], "g_sign": 1 },
  "initial": { "n0": 0, "alpha0": [1.0, 0.0] },
  "window": { "n_min": -5, "n_max": 5 },
  "output": { "format": "csv" }
}"#;

const GENUS1: &str = r#"{
  "curve": { "branch_points": [[1.0, 0.0], [2.0, 0.0], [3.0, 0.0], [4.0, 0.0]], "g_sign": 1 },
  "initial": { "n0": 0, "alpha0": [1.0, 0.0], "mu_hat": [ { "z": [2.5, 0.9], "sheet": 1 } ] },
  "window": { "n_min": -3, "n_max": 3 }
}"#;

#[test]
fn curve_info_prints_summary() {
    let cfg = write_tmp("info.json", GENUS1);
    let out = bin().args(["curve-info", "--config"]).arg(&cfg).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("genus 1"));
    assert!(text.contains("\"tau\""));
}

#[test]
fn malformed_config_exits_two_with_location() {
    let cfg = write_tmp("bad.json", "{ \"curve\": { \"branch_points\": [[1.0,, ]] } }");
    let out = bin().args(["curve-info", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line"), "missing location: {err}");
}

#[test]
fn genus0_csv_matches_closed_form() {
    let cfg = write_tmp("g0.json", GENUS0);
    let out = bin().args(["solve", "--config"]).arg(&cfg).args(["--format", "csv"]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "n,alpha_re,alpha_im,beta_re,beta_im");
    // alpha(n) = (-2)^n
    let row: Vec<&str> = text.lines().find(|l| l.starts_with("3,")).unwrap().split(',').collect();
    let a3: f64 = row[1].parse().unwrap();
    assert_eq!(a3, -8.0);
}

#[test]
fn theta_eval_runs() {
    let cfg = write_tmp("g1.json", GENUS1);
    let out = bin()
        .args(["theta-eval", "--config"])
        .arg(&cfg)
        .args(["--z", "[[0.0, 0.0]]"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.trim().starts_with('['));
}

#[test]
fn special_divisor_config_exits_two() {
    let cfg_text = r#"{
      "curve": { "branch_points": [[1.0, 0.0], [2.0, 0.0], [3.0, 0.0], [4.0, 0.0], [5.5, 0.0], [6.5, 0.0]], "g_sign": 1 },
      "initial": { "n0": 0, "alpha0": [1.0, 0.0],
        "mu_hat": [ { "z": [2.5, 0.9], "sheet": 1 }, { "z": [2.5, 0.9], "sheet": -1 } ] },
      "window": { "n_min": -2, "n_max": 2 }
    }"#;
    let cfg = write_tmp("special.json", cfg_text);
    let out = bin().args(["solve", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("special_divisor"), "{err}");
}

#[test]
fn verify_roundtrip_through_files() {
    let dir = std::env::temp_dir().join("sblat-cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = write_tmp("g0v.json", GENUS0);
    let seq_path = dir.join("seq.csv");
    let out = bin()
        .args(["solve", "--config"])
        .arg(&cfg)
        .args(["--format", "csv", "--out"])
        .arg(&seq_path)
        .output()
        .unwrap();
    assert!(out.status.success());
    let out = bin()
        .args(["verify", "--config"])
        .arg(&cfg)
        .arg("--sequences")
        .arg(&seq_path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("\"pass\": true"), "{text}");

    // random sequences must fail with exit 1
    let mut junk = String::from("n,alpha_re,alpha_im,beta_re,beta_im\n");
    for n in -8i64..=8 {
        junk.push_str(&format!("{n},{}.0,0.25,0.5,-0.125\n", (n % 3) - 1));
    }
    let junk_path = write_tmp("junk.csv", &junk);
    let out = bin()
        .args(["verify", "--config"])
        .arg(&cfg)
        .arg("--sequences")
        .arg(&junk_path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn genus1_solve_end_to_end() {
    let cfg = write_tmp("g1solve.json", GENUS1);
    let out = bin().args(["solve", "--config"]).arg(&cfg).output().unwrap();
    assert!(
        out.status.success(),
        "stdout: {} stderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8_lossy(&out.stdout);
    let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!(parsed["report"]["riccati"]["pass"].as_bool().unwrap());
    assert!(parsed["provenance"]["config_sha256"].as_str().unwrap().len() == 64);
    // bitwise-identical rerun
    let out2 = bin().args(["solve", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.stdout, out2.stdout);
}
