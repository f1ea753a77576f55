//! Acceptance suite: one test per exit criterion, each printing a PASS line
//! with its measured runtime (visible with `-- --nocapture`).
//!
//! Every tolerance and threshold is pinned here and in the verification
//! suites; nothing is deferred to later calibration. The criteria map onto
//! the named `verify` suites, so `pairmetric verify --suite all` reproduces
//! this table from the command line.

use std::process::Command;
use std::time::Instant;

use pairmetric_cli::verify::{run_suites, VerifyOptions};

fn suite_pass(name: &str, limit_secs: f64) -> (f64, String) {
    let start = Instant::now();
    let report = run_suites(name, &VerifyOptions::default()).expect("known suite");
    let elapsed = start.elapsed().as_secs_f64();
    let suite = &report.suites[0];
    assert!(suite.pass, "{name} failed: {}", suite.details);
    assert!(
        elapsed < limit_secs,
        "{name} took {elapsed:.1}s, limit {limit_secs}s"
    );
    (elapsed, suite.details.clone())
}

#[test]
fn criterion_01_hierarchy() {
    let (secs, details) = suite_pass("hierarchy", 1.0);
    println!("criterion 01 hierarchy: PASS ({secs:.2}s) — {details}");
}

#[test]
fn criterion_02_decoupling() {
    let (secs, details) = suite_pass("decoupling", 120.0);
    println!("criterion 02 decoupling: PASS ({secs:.2}s) — {details}");
}

#[test]
fn criterion_03_monotonicity() {
    let (secs, details) = suite_pass("monotonicity", 120.0);
    println!("criterion 03 monotonicity: PASS ({secs:.2}s) — {details}");
}

#[test]
fn criterion_04_theorem3_bound_validity() {
    let (secs, details) = suite_pass("theorem3", 600.0);
    println!("criterion 04 theorem3: PASS ({secs:.2}s) — {details}");
}

#[test]
fn criterion_05_theorem4_bound_validity() {
    let (secs, details) = suite_pass("theorem4", 300.0);
    println!("criterion 05 theorem4: PASS ({secs:.2}s) — {details}");
}

#[test]
fn criterion_06_theorem5_golden_values() {
    let (secs, details) = suite_pass("theorem5", 60.0);
    println!("criterion 06 theorem5: PASS ({secs:.2}s) — {details}");
}

#[test]
fn criterion_07_rademacher_enumeration_oracle() {
    let (secs, details) = suite_pass("rademacher", 60.0);
    println!("criterion 07 rademacher: PASS ({secs:.2}s) — {details}");
}

#[test]
fn criterion_08_complexity_decay() {
    let (secs, details) = suite_pass("decay", 300.0);
    println!("criterion 08 decay: PASS ({secs:.2}s) — {details}");
}

#[test]
fn criterion_09_gradient_check() {
    let (secs, details) = suite_pass("gradient", 60.0);
    println!("criterion 09 gradient: PASS ({secs:.2}s) — {details}");
}

#[test]
fn criterion_10_diagonalization() {
    let (secs, details) = suite_pass("diagonalization", 60.0);
    println!("criterion 10 diagonalization: PASS ({secs:.2}s) — {details}");
}

#[test]
fn criterion_11_theorem6_report() {
    let (secs, details) = suite_pass("theorem6", 120.0);
    println!("criterion 11 theorem6: PASS ({secs:.2}s) — {details}");
}

#[test]
fn criterion_12_determinism_and_schema() {
    // in-process check
    let (secs, details) = suite_pass("determinism", 120.0);

    // and through the actual binary: repeated sweeps with equal seeds must
    // be byte-identical and carry the golden header
    let dir = tempfile::TempDir::new().unwrap();
    let config_path = dir.path().join("sweep.json");
    let config =
        serde_json::to_string(&pairmetric_cli::demo::demo_sweep_config(vec![12], 2, 31337))
            .unwrap();
    std::fs::write(&config_path, config).unwrap();
    let mut outputs = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let out_path = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_pairmetric"))
            .args([
                "sweep",
                "--config",
                config_path.to_str().unwrap(),
                "--out",
                out_path.to_str().unwrap(),
                "--quiet",
            ])
            .status()
            .unwrap();
        assert!(status.success());
        outputs.push(std::fs::read(&out_path).unwrap());
    }
    assert_eq!(
        outputs[0], outputs[1],
        "binary sweeps must be byte-identical"
    );
    let text = String::from_utf8(outputs[0].clone()).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        pairmetric_cli::sweep::CSV_HEADER
    );

    println!("criterion 12 determinism: PASS ({secs:.2}s) — {details}; binary-level sweep byte-identical");
}

#[test]
fn full_verify_suite_under_twenty_minutes() {
    let start = Instant::now();
    let report = run_suites("all", &VerifyOptions::default()).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    assert!(report.all_pass, "{:#?}", report.suites);
    assert!(elapsed < 1200.0, "full suite took {elapsed:.0}s");
    println!(
        "full verify --suite all: PASS ({elapsed:.1}s for {} suites)",
        report.suites.len()
    );
}
