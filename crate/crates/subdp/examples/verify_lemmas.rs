//! Runs the numerical verifiers behind the calibration constants.
//!
//! Each verifier checks one inequality the mechanism scales depend on,
//! either by deterministic quadrature or by Monte-Carlo with a standard
//! error allowance, and reports its worst margin (negative = violated).
//!
//! Run with: cargo run --release --example verify_lemmas

use subdp::verify::run_verifier;

fn main() -> subdp::Result<()> {
    for report in run_verifier("all", 200_000, 2024)? {
        println!(
            "{:22} {}  worst margin = {:+.3e}  ({} checks)",
            report.name,
            if report.passed { "pass" } else { "FAIL" },
            report.worst_margin,
            report.checks
        );
    }
    Ok(())
}
