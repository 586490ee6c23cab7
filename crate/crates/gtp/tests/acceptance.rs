//! Acceptance gate: runs each verification criterion at its pinned default
//! configuration (fine grid, 10^5 samples, seed 42) and prints one PASS/FAIL
//! status line per criterion. Tolerances live in the verification module;
//! nothing here may weaken them.

use gtp::verify::{run_criterion, VerifyConfig};

fn check(id: usize) {
    let config = VerifyConfig::default();
    let report = run_criterion(id, &config).expect("criterion runs");
    println!("{}", report.status_line());
    for warning in &report.warnings {
        println!("    WIDE-CI {warning}");
    }
    assert!(
        report.passed,
        "criterion {id} ({}) failed: {}",
        report.name, report.details
    );
}

#[test]
fn criterion_01_standard_protocol_exactness() {
    check(1);
}

#[test]
fn criterion_02_matched_basis_exactness() {
    check(2);
}

#[test]
fn criterion_03_averaged_formula_agreement() {
    check(3);
}

#[test]
fn criterion_04_monte_carlo_agreement() {
    check(4);
}

#[test]
fn criterion_05_exchange_symmetry() {
    check(5);
}

#[test]
fn criterion_06_dephasing_recovery() {
    check(6);
}

#[test]
fn criterion_07_multi_channel_efficiency() {
    check(7);
}

#[test]
fn criterion_08_multi_channel_matched_exactness() {
    check(8);
}

#[test]
fn criterion_09_perturbed_sweep_properties() {
    check(9);
}

#[test]
fn criterion_10_optimizer_maximum() {
    check(10);
}

#[test]
fn criterion_11_haar_moment_sanity() {
    check(11);
}

#[test]
fn criterion_12_reproducibility() {
    check(12);
}
