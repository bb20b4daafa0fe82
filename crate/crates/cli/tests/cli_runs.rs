//! End-to-end binary behavior: artifact layout, cache round trip, error
//! records, and config-file replay.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_paircorr"))
}

#[test]
fn spectrum_dump_lists_the_hand_case() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["spectrum", "--k", "2", "--alpha", "0,0", "--cutoff", "1", "--dump"])
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lambdas: Vec<&str> = text
        .lines()
        .filter(|l| l.contains(','))
        .map(|l| l.split(',').nth(1).unwrap())
        .collect();
    assert_eq!(lambdas, ["0", "1", "1", "1", "1"]);
    assert!(dir.path().join("manifest.json").exists());
    assert!(dir.path().join("spectrum.csv").exists());
}

#[test]
fn spectrum_cache_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("slice.bin");
    let first = dir.path().join("a");
    let second = dir.path().join("b");
    let status = bin()
        .args(["spectrum", "--k", "2", "--alpha", "1/2,1/3", "--cutoff", "30"])
        .arg("--cache")
        .arg(&cache)
        .arg("--out")
        .arg(&first)
        .status()
        .unwrap();
    assert!(status.success());
    let status = bin()
        .args(["spectrum", "--k", "2", "--alpha", "1/2,1/3", "--cutoff", "30"])
        .arg("--use-cache")
        .arg(&cache)
        .arg("--out")
        .arg(&second)
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(
        std::fs::read(first.join("spectrum.csv")).unwrap(),
        std::fs::read(second.join("spectrum.csv")).unwrap()
    );
}

#[test]
fn failures_emit_machine_readable_records() {
    // domain error from the library
    let out = bin()
        .args(["spectrum", "--k", "2", "--alpha", "0,0,0", "--cutoff", "1"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let record: serde_json::Value =
        serde_json::from_slice(&out.stderr).expect("stderr is a JSON error record");
    assert!(record["error"]["message"].is_string());

    // config parse error with file position
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "k = 2\nbroken line\n").unwrap();
    let out = bin()
        .args(["paircorr", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(!out.status.success());
    let record: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(record["error"]["kind"], "config");
    assert!(record["error"]["message"]
        .as_str()
        .unwrap()
        .contains("bad.cfg:2"));
}

#[test]
fn config_replay_reproduces_outputs_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let flags_out = dir.path().join("flags");
    let cfg_out = dir.path().join("cfg");
    let status = bin()
        .args(["paircorr", "--k", "2", "--alpha", "algebraic:2", "--x", "500", "--window", "0,1"])
        .arg("--out")
        .arg(&flags_out)
        .status()
        .unwrap();
    assert!(status.success());

    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        format!(
            "k = 2\nalpha = algebraic:2\nx = 500\nwindow = 0,1\nout = {}\n",
            cfg_out.display()
        ),
    )
    .unwrap();
    let status = bin().args(["paircorr", "--config"]).arg(&cfg).status().unwrap();
    assert!(status.success());
    // CSVs are byte-identical; manifests differ only in wall-clock timing
    assert_eq!(
        std::fs::read(flags_out.join("paircorr.csv")).unwrap(),
        std::fs::read(cfg_out.join("paircorr.csv")).unwrap()
    );
}

#[test]
fn output_dir_env_var_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["spectrum", "--k", "2", "--alpha", "0,0", "--cutoff", "2"])
        .env("PAIRCORR_OUT_DIR", dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    assert!(dir.path().join("spectrum.csv").exists());
}
