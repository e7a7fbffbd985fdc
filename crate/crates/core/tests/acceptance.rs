//! Acceptance suite: one test per claim group, every tolerance pinned in
//! `noisekex::harness::claims`. Each test prints one pass/fail line per
//! check (visible with `--nocapture`), and the same checks back the
//! `claims-check` CLI subcommand.
//!
//! Run with:
//!
//! ```shell
//! cargo test -p noisekex --test acceptance -- --nocapture
//! ```

use noisekex::harness::claims::{run_claims, ClaimsOptions};

fn run_group(group: &str) {
    let options = ClaimsOptions {
        filter: Some(group.to_string()),
        ..Default::default()
    };
    let results = run_claims(&options).unwrap_or_else(|e| panic!("claim group {group} errored: {e}"));
    assert!(!results.is_empty(), "claim group {group} produced no checks");
    let mut failures = Vec::new();
    for r in &results {
        let status = if r.pass { "PASS" } else { "FAIL" };
        println!(
            "[{status}] {}: measured {:.6e} vs expected {:.6e} (tolerance {:.3e}, {})",
            r.claim_id, r.measured, r.expected, r.tolerance, r.comparison
        );
        if !r.pass {
            failures.push(r.claim_id.clone());
        }
    }
    assert!(failures.is_empty(), "failed checks in {group}: {failures:?}");
}

#[test]
fn criterion_1_mixed_state_indistinguishability() {
    run_group("mixed-indistinguishability");
}

#[test]
fn criterion_2_seventy_five_percent_attack() {
    run_group("eve-75");
}

#[test]
fn criterion_3_key_256_leakage() {
    run_group("key-256-leakage");
}

#[test]
fn criterion_4_pa_convergence() {
    run_group("pa-convergence");
}

#[test]
fn criterion_5_pa_monte_carlo() {
    run_group("pa-monte-carlo");
}

#[test]
fn criterion_6_power_formula() {
    run_group("power-formula");
}

#[test]
fn criterion_7_ber_behavior() {
    run_group("ber-behavior");
}

#[test]
fn criterion_8_thermod_insecurity() {
    run_group("thermod-insecurity");
}

#[test]
fn criterion_9_determinism() {
    run_group("determinism");
}

/// The full default run the CLI performs: everything passes, and the failure
/// counter the process exit code is built from reads zero.
#[test]
fn full_default_claims_run_is_green() {
    let results = run_claims(&ClaimsOptions::default()).expect("claims run");
    let failed = noisekex::harness::claims::failed_count(&results);
    for r in results.iter().filter(|r| !r.pass) {
        eprintln!(
            "FAILED {}: measured {} vs expected {} tol {}",
            r.claim_id, r.measured, r.expected, r.tolerance
        );
    }
    assert_eq!(failed, 0);
    // Every group reported at least one check.
    for group in noisekex::harness::claims::CLAIM_GROUPS {
        assert!(
            results.iter().any(|r| r.group() == group),
            "group {group} missing from default run"
        );
    }
}
