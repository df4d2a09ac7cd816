//! Empirical privacy audit of a designated estimator pair.
//!
//! The audit runs a mechanism many times on two neighboring inputs,
//! histograms both output samples over a shared grid, and reports the
//! largest log-ratio between bin frequencies. A private mechanism stays
//! under its epsilon target plus a statistical slack; the unnoised control
//! must blow through it, which is what makes the audit informative.
//!
//! Run with: cargo run --release --example audit_epsilon

use subdp::audit::AuditConfig;
use subdp::cases::run_audit_case;

fn main() -> subdp::Result<()> {
    let cfg = AuditConfig::new(20_000, 40, 1.0, 99)?;

    for case in ["cc", "f2", "control"] {
        let report = run_audit_case(case, &cfg)?;
        println!(
            "{case:8} relation = {:13} measured = {:.3}  target + slack = {:.3}  {}",
            serde_json::to_string(&report.relation).unwrap(),
            report.epsilon_measured,
            report.epsilon_target + report.slack,
            if report.passed { "pass" } else { "FAIL" }
        );
    }
    Ok(())
}
