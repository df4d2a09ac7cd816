//! Samples both noise mechanisms and checks their calibration constants.
//!
//! Run with: cargo run --release --example mechanisms

use subdp::noise::{
    laplace_c, laplace_scale, sample_laplace, sample_zspareto, zspareto_c,
    zspareto_magnitude_quantile, zspareto_scale,
};
use subdp::{PrivacyBudget, RandomSource, SensitivitySpec};

fn main() -> subdp::Result<()> {
    let mut rng = RandomSource::new(42, 0);
    let trials = 1_000_000;

    // Zero-symmetric Pareto with tail exponent 3 at scale s has mean
    // absolute value exactly s.
    let scale = 1.0;
    let mut sum_abs = 0.0;
    for _ in 0..trials {
        sum_abs += sample_zspareto(3.0, scale, &mut rng).abs();
    }
    println!("zspareto(3, {scale}): mean |draw| = {:.4}", sum_abs / trials as f64);

    let mut sum_abs = 0.0;
    for _ in 0..trials {
        sum_abs += sample_laplace(scale, &mut rng).abs();
    }
    println!("laplace({scale}):     mean |draw| = {:.4}", sum_abs / trials as f64);

    // Mechanism scales for a query of sensitivity 1 riding on an estimator
    // that already accepts error of diameter 10.
    let budget = PrivacyBudget::new(0.5)?;
    let sens = SensitivitySpec::new(1.0, 10.0, 1)?;
    println!(
        "laplace mechanism: c = {:.4}, scale = {:.4}",
        laplace_c(1),
        laplace_scale(&sens, &budget)?
    );
    println!(
        "zspareto mechanism: c = {:.4}, scale = {:.4}",
        zspareto_c(3.0)?,
        zspareto_scale(3.0, &sens, &budget)?
    );

    // Tail quantiles show the polynomial versus exponential difference.
    for q in [0.5, 0.9, 0.99, 0.999] {
        println!(
            "P[|zspareto(3, 1)| <= {:8.3}] = {q}",
            zspareto_magnitude_quantile(3.0, 1.0, q)
        );
    }
    Ok(())
}
