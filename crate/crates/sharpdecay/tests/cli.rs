//! End-to-end runs of the binary: outputs and exit codes.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sharpdecay"))
        .args(args)
        .current_dir(concat!(env!("CARGO_MANIFEST_DIR"), "/../.."))
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn bands_free_chain() {
    let o = run(&["bands", "--config", "configs/free1d.toml"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("[-2.00000, 2.00000]"), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("k_1,lambda_1\n"));
}

#[test]
fn rate_at_three() {
    let o = run(&["rate", "--config", "configs/free1d.toml", "--lambda", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(
        stdout(&o).contains("r_upper (5 dp) = 0.96242"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn green_inside_the_spectrum_is_spectral_proximity() {
    let o = run(&[
        "green",
        "--config",
        "configs/free1d.toml",
        "--lambda",
        "0.5",
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn missing_config_is_a_config_error() {
    let o = run(&["bands", "--config", "configs/does_not_exist.toml"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn malformed_lambda_is_a_usage_error() {
    let o = run(&[
        "rate",
        "--config",
        "configs/free1d.toml",
        "--lambda",
        "three",
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn probe_writes_the_header() {
    let o = run(&[
        "probe",
        "--config",
        "configs/probe_superexp.toml",
        "--sizes",
        "20",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o)
        .lines()
        .nth(2)
        .is_some_and(|l| l == "L,eigenvalue,boundary_mass_ratio,in_band"));
}

#[test]
fn verify_subset_passes() {
    let o = run(&["verify", "--only", "spectrum."]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("4 checks, 0 failed"));
}
