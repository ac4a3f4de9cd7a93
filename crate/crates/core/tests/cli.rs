use std::path::Path;

use serde_json::Value;
use univlab::cli::{read_log, run_with, EXIT_CONFIG, EXIT_DOMAIN, EXIT_MISMATCH, EXIT_OK};

fn run(log: &Path, parts: &[&str]) -> (i32, Value, String) {
    let mut args = vec!["univlab".to_string(), "--log".into(), log.display().to_string()];
    args.extend(parts.iter().map(|s| s.to_string()));
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run_with(&args, &mut out, &mut err);
    let payload = serde_json::from_slice(&out).unwrap_or(Value::Null);
    (code, payload, String::from_utf8_lossy(&err).into_owned())
}

#[test]
fn characters_of_modulus_four() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("runs.jsonl");
    let (code, v, _) = run(&log, &["characters", "--modulus", "4"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(v["schema"], "univlab.characters/1");
    assert_eq!(v["result"]["count"], 2);
    assert_eq!(read_log(&log).unwrap().len(), 1);
}

#[test]
fn lvalue_at_two_for_modulus_four() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("runs.jsonl");
    let (code, v, _) = run(
        &log,
        &["lvalue", "--modulus", "4", "--index", "1", "--sigma", "2"],
    );
    assert_eq!(code, EXIT_OK);
    let re = v["result"]["value"][0].as_f64().unwrap();
    assert!((re - 0.915_965_594_177_219).abs() < 1e-12);
}

#[test]
fn pathology_of_log_twelve() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("runs.jsonl");
    let (code, v, _) = run(&log, &["pathology", "--alpha", "4pi/log(12)"]);
    assert_eq!(code, EXIT_OK);
    let r = &v["result"];
    assert_eq!(r["m_star"], 2);
    assert_eq!(r["support"], serde_json::json!([2, 3]));
    assert_eq!(r["p_star"], 2);
    assert_eq!(r["q_star"], 2);
}

#[test]
fn pathological_family_fails_weyl_criterion() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("runs.jsonl");
    let (code, v, _) = run(
        &log,
        &["ud-test", "--alpha", "2pi/log(2)", "--a", "2", "--n", "1000"],
    );
    assert_eq!(code, EXIT_OK);
    assert_eq!(v["result"]["report"]["verdict"]["pass"], false);
    assert_eq!(v["result"]["report"]["weyl"][0]["modulus"], 1.0);
}

#[test]
fn pole_is_a_domain_error() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("runs.jsonl");
    let (code, _, err) = run(&log, &["lvalue", "--sigma", "1"]);
    assert_eq!(code, EXIT_DOMAIN, "{err}");
    assert!(read_log(&log).unwrap_or_default().is_empty());
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("runs.jsonl");
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "[scan]\nepsilonn = 0.3\n").unwrap();
    let (code, _, _) = run(&log, &["scan", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(!log.exists());
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("runs.jsonl");
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "[characters]\nmodulus = 12\n").unwrap();
    let (_, v, _) = run(&log, &["characters", "--config", cfg.to_str().unwrap()]);
    assert_eq!(v["result"]["count"], 4);
    let (_, v, _) = run(
        &log,
        &["characters", "--config", cfg.to_str().unwrap(), "--modulus", "5"],
    );
    assert_eq!(v["result"]["count"], 4);
    assert_eq!(v["result"]["modulus"], 5);
}

#[test]
fn replay_detects_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("runs.jsonl");
    let cfg = dir.path().join("c.toml");
    std::fs::write(
        &cfg,
        "[scan]\nt = 20.0\nstep = 0.2\nrect = { sigma = [0.75, 0.85], t = [-0.1, 0.1], grid = [4, 4] }\n",
    )
    .unwrap();
    let (code, _, _) = run(&log, &["scan", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(run(&log, &["replay", "0", "--workers", "2"]).0, EXIT_OK);

    let mut rec = read_log(&log).unwrap().remove(0);
    rec.payload["result"]["report"]["density"] = Value::from(0.5);
    let tampered = dir.path().join("tampered.jsonl");
    std::fs::write(&tampered, serde_json::to_string(&rec).unwrap() + "\n").unwrap();
    assert_eq!(run(&tampered, &["replay", "0"]).0, EXIT_MISMATCH);

    std::fs::write(&cfg, "[scan]\nt = 21.0\n").unwrap();
    assert_eq!(run(&log, &["replay", "0"]).0, EXIT_DOMAIN);
    assert_eq!(run(&log, &["replay", "7"]).0, EXIT_DOMAIN);
}

#[test]
fn scan_writes_plot_table() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("runs.jsonl");
    let csv = dir.path().join("scan.csv");
    let mut args = vec!["--csv", csv.to_str().unwrap()];
    args.extend(["scan", "--discrete", "--n", "30"]);
    let (code, v, err) = run(&log, &args);
    assert_eq!(code, EXIT_OK, "{err}");
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("shift,distance,exact"));
    assert_eq!(text.lines().count(), 30);
    assert!(v["result"]["report"]["density"].is_number());
}
