//! One test per acceptance criterion; each prints its pass/fail line.

use ckmax_core::acceptance;

const SEED: u64 = 1;

fn check(id: u8) {
    let res = acceptance::run(id, SEED).expect("known criterion");
    println!("{res}");
    assert!(res.passed, "{res}");
}

#[test]
fn criterion_01_constant_formulas() {
    check(1);
}

#[test]
fn criterion_02_amalgam_two_term_constants() {
    check(2);
}

#[test]
fn criterion_03_estimate_duality() {
    check(3);
}

#[test]
fn criterion_04_renorming_sandwiches() {
    check(4);
}

#[test]
fn criterion_05_maximal_bound_exact_norms() {
    check(5);
}

#[test]
fn criterion_06_triangular_bound() {
    check(6);
}

#[test]
fn criterion_07_maximal_operator_identities() {
    check(7);
}

#[test]
fn criterion_08_dft_maximal_anchor() {
    check(8);
}

#[test]
fn criterion_09_lorentz_machinery() {
    check(9);
}

#[test]
fn criterion_10_kothe_dual_harness() {
    check(10);
}
