use std::path::Path;
use std::process::{Command, Output};

const BENIGN: &str = r#"{"alpha":0.5,"transmittance":0.5,"excess_noise":0.01,"beta":0.95,
    "n":100000000,"m":1000,"k":10000000000,"p_ec":0.9,"delta_ent_mode":"derived"}"#;

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dmcvqkd"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    csv::Reader::from_path(path)
        .unwrap()
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect()
}

fn with_config(json: &str) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.json"), json).unwrap();
    dir
}

#[test]
fn benign_keyrate_has_key() {
    let dir = with_config(BENIGN);
    let out = run(&["keyrate", "--config", "c.json", "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_rows(&dir.path().join("o/keyrate.csv"));
    assert_eq!(rows.len(), 1);
    assert!(dir.path().join("o/reduction.csv").exists());
}

#[test]
fn paper_literal_entropy_penalty_removes_the_key() {
    let dir = with_config(BENIGN);
    let out = run(&["keyrate", "--config", "c.json", "--out", "o", "--delta-ent-mode", "paper"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn deep_loss_has_no_key() {
    let dir = with_config(&BENIGN.replace("\"transmittance\":0.5", "\"transmittance\":0.001"));
    let out = run(&["keyrate", "--config", "c.json", "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn missing_field_is_reported() {
    let dir = with_config(r#"{"alpha":0.5,"excess_noise":0.01,"beta":0.95,"n":10,"m":10,"k":10}"#);
    let out = run(&["keyrate", "--config", "c.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("transmittance"));
}

#[test]
fn out_of_range_field_is_rejected() {
    let dir = with_config(&BENIGN.replace("\"beta\":0.95", "\"beta\":1.5"));
    let out = run(&["keyrate", "--config", "c.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("beta"));
}

#[test]
fn single_point_sweep_matches_keyrate() {
    let dir = with_config(BENIGN);
    run(&["keyrate", "--config", "c.json", "--out", "k"], dir.path());
    let out = run(&["sweep", "--config", "c.json", "--out", "s", "--axis", "transmittance", "--grid", "0.5"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let k = csv_rows(&dir.path().join("k/keyrate.csv"));
    let s = csv_rows(&dir.path().join("s/sweep.csv"));
    assert_eq!(s.len(), 1);
    assert_eq!(&s[0][..3], &["transmittance", "0.5", "ok"]);
    assert_eq!(s[0][3..], k[0][..]);
}

#[test]
fn sweep_keeps_failing_points() {
    let dir = with_config(BENIGN);
    let out = run(
        &["sweep", "--config", "c.json", "--out", "s", "--axis", "transmittance", "--grid", "0.3,1.5,0.9"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let s = csv_rows(&dir.path().join("s/sweep.csv"));
    let status: Vec<&str> = s.iter().map(|r| r[2].as_str()).collect();
    assert_eq!(status[0], "no-key");
    assert!(status[1].starts_with("error"));
    assert_eq!(status[2], "ok");

    let bad = run(&["sweep", "--config", "c.json", "--axis", "colour", "--grid", "1"], dir.path());
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn simulate_writes_transcript() {
    let dir = with_config(
        r#"{"alpha":0.5,"transmittance":0.6,"excess_noise":0.05,"beta":0.95,
            "n":20000,"m":100,"k":10000,"seed":3}"#,
    );
    let out = run(&["simulate", "--config", "c.json", "--out", "o", "--seed", "4"], dir.path());
    assert!(matches!(out.status.code(), Some(0) | Some(2)));
    let t = csv_rows(&dir.path().join("o/transcript.csv"));
    assert_eq!(t[0], ["seed", "4"]);
    assert_eq!(t.last().unwrap()[0], "status");
    assert_eq!(csv_rows(&dir.path().join("o/batch.csv")).len(), 2 * (20000 + 100 + 10000));
}

#[test]
fn adversarial_simulation_aborts() {
    let dir = with_config(
        r#"{"alpha":0.5,"transmittance":0.6,"excess_noise":0.05,"sim_excess_noise":0.5,
            "beta":0.95,"n":2000,"m":100,"k":10000,"seed":3}"#,
    );
    let out = run(&["simulate", "--config", "c.json", "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let t = csv_rows(&dir.path().join("o/transcript.csv"));
    assert_eq!(t.last().unwrap()[1], "abort-pe");
}

#[test]
fn validate_bounds_small_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["validate-bounds", "--trials", "1000", "--out", "v"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let rows = csv_rows(&dir.path().join("v/bounds.csv"));
    assert_eq!(rows.len(), 15);
    assert!(rows.iter().all(|r| r[7] == "pass"));
}
