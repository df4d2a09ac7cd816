//! Privatizes a custom Monte-Carlo estimator through the generic pipeline.
//!
//! The estimator below stands in for any randomized routine whose error
//! promise is subexponential: it computes an exact sum and jitters it with
//! Laplace noise of diameter `rho * n`, so the promise holds by
//! construction. Privatization then costs only a constant factor on top of
//! the error the caller already accepted.
//!
//! Run with: cargo run --release --example privatize_basics

use subdp::privatize::{boost_confidence, privatize_once};
use subdp::noise::sample_laplace;
use subdp::{ApproxEstimator, ErrorKind, PrivacyBudget, RandomSource};

struct JitteredSum;

impl ApproxEstimator for JitteredSum {
    type Input = [f64];

    fn evaluate(&self, input: &[f64], rho: f64, rng: &mut RandomSource) -> subdp::Result<f64> {
        let exact: f64 = input.iter().sum();
        Ok(exact + sample_laplace(self.error_scale(input, rho), rng))
    }

    fn error_scale(&self, input: &[f64], rho: f64) -> f64 {
        rho * input.len() as f64
    }

    fn kind(&self) -> ErrorKind {
        ErrorKind::Subexponential
    }

    // Entries live in [0, 1], so one record moves the sum by at most 1.
    fn sensitivity(&self) -> f64 {
        1.0
    }
}

fn main() -> subdp::Result<()> {
    let mut rng = RandomSource::new(7, 0);
    let data: Vec<f64> = (0..10_000).map(|i| (i % 2) as f64).collect();
    let exact: f64 = data.iter().sum();
    let budget = PrivacyBudget::new(1.0)?;

    let est = privatize_once(&JitteredSum, &data, 0.01, &budget, false, &mut rng)?;
    println!("exact sum      = {exact}");
    println!("private value  = {:.2}", est.value);
    println!("mechanism      = {}", serde_json::to_string(&est.mechanism).unwrap());

    // Too fine an accuracy request makes the sensitivity term dominate,
    // and the pipeline refuses instead of returning noise-swamped output.
    match privatize_once(&JitteredSum, &data, 0.00001, &budget, false, &mut rng) {
        Err(e) => println!("rho = 0.00001 refused: {e}"),
        Ok(_) => unreachable!(),
    }

    // Confidence boosting retunes the accuracy schedule so the promise
    // holds except with probability beta.
    let boosted = boost_confidence(&JitteredSum, &data, 0.01, &budget, 0.05, &mut rng)?;
    println!(
        "boosted value  = {:.2} (runs = {}, per-run rho = {:.5})",
        boosted.value, boosted.runs, boosted.rho_run
    );
    Ok(())
}
