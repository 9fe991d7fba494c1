//! The eleven acceptance criteria at their stated tolerances. Each prints one
//! PASS/FAIL line; run with `--nocapture` to see them all.

use dbl_core::verify::{self, CheckResult, DEFAULT_PATHS, DEFAULT_SEED};

fn check(result: CheckResult) {
    println!("{}", result.line());
    assert!(result.passed, "{}", result.line());
}

#[test]
fn criterion_01_conditioning_oracle() {
    check(verify::gaussian_oracle());
}

#[test]
fn criterion_02_kalman_smoother() {
    check(verify::kalman_oracle());
}

#[test]
fn criterion_03_riccati_residual() {
    check(verify::riccati_check());
}

#[test]
fn criterion_04_policy_forms() {
    check(verify::policy_forms_check());
}

#[test]
fn criterion_05_hitting_times() {
    check(verify::hitting_times_check());
}

#[test]
fn criterion_06_bridge_sampling() {
    check(verify::bridge_sampling_check());
}

#[test]
fn criterion_07_semigroup() {
    check(verify::semigroup_check());
}

#[test]
fn criterion_08_structural_equalities() {
    check(verify::structural_equality_check());
}

#[test]
fn criterion_09_dbl_vs_rcbl() {
    check(verify::comparison_check(DEFAULT_PATHS, DEFAULT_SEED));
}

#[test]
fn criterion_10_revision_value() {
    check(verify::revisions_check(DEFAULT_PATHS, DEFAULT_SEED));
}

#[test]
fn criterion_11_limits() {
    check(verify::limits_check());
}
