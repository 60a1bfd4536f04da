//! Acceptance suite: one test per verification criterion, each printing
//! its pass/fail line. The same criteria back the CLI `verify`
//! subcommand, so `cargo test` and `sparsebound verify` agree.

use sparsebound::acceptance::{
    criterion_10_reproducibility, criterion_1_fano_consistency, criterion_2_binary_cap,
    criterion_3_adaptive_achievability, criterion_4_circulant_eigenstructure,
    criterion_5_jensen_dominance, criterion_6_uniform_allocation,
    criterion_7_reduction_identity, criterion_8_cs_feasibility,
    criterion_9_decoder_equivalence, CriterionResult, DEFAULT_SUITE_SEED,
};

fn check(result: sparsebound::Result<CriterionResult>) {
    let result = result.expect("criterion evaluates");
    println!("{}", result.status_line());
    assert!(result.passed, "{}", result.status_line());
}

#[test]
fn criterion_01_fano_consistency() {
    check(criterion_1_fano_consistency(DEFAULT_SUITE_SEED));
}

#[test]
fn criterion_02_binary_mi_cap() {
    check(criterion_2_binary_cap(DEFAULT_SUITE_SEED));
}

#[test]
fn criterion_03_adaptive_achievability() {
    check(criterion_3_adaptive_achievability(DEFAULT_SUITE_SEED));
}

#[test]
fn criterion_04_circulant_eigenstructure() {
    check(criterion_4_circulant_eigenstructure(DEFAULT_SUITE_SEED));
}

#[test]
fn criterion_05_jensen_dominance() {
    check(criterion_5_jensen_dominance(DEFAULT_SUITE_SEED));
}

#[test]
fn criterion_06_uniform_allocation_optimality() {
    check(criterion_6_uniform_allocation(DEFAULT_SUITE_SEED));
}

#[test]
fn criterion_07_reduction_identity() {
    check(criterion_7_reduction_identity(DEFAULT_SUITE_SEED));
}

#[test]
fn criterion_08_cs_feasibility_region() {
    check(criterion_8_cs_feasibility(DEFAULT_SUITE_SEED));
}

#[test]
fn criterion_09_decoder_oracle_equivalence() {
    check(criterion_9_decoder_equivalence(DEFAULT_SUITE_SEED));
}

#[test]
fn criterion_10_reports_reproduce_bytewise() {
    check(criterion_10_reproducibility(DEFAULT_SUITE_SEED));
}
