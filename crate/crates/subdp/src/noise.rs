//! Noise primitives: calibrated scales, samplers, densities, and
//! subexponential-diameter arithmetic.
//!
//! Two mechanisms are provided. The Laplace mechanism covers estimators
//! whose error has a subexponential tail and supports `k` adaptively chosen
//! queries against one hidden random state. The zero-symmetric Pareto
//! mechanism covers estimators with only a bounded `alpha`-th error moment;
//! it is single-query and its noise has matching polynomial tails, so the
//! noise never dominates the estimator's own failure probability.
//!
//! Scales always combine the query sensitivity `delta1` (worst-case change
//! of the target quantity between neighboring inputs) and the estimator
//! error diameter `delta2` (subexponential diameter or `alpha`-norm bound of
//! the estimation error). Splitting them is what lets approximation error
//! absorb most of the privacy cost.

use crate::error::{Error, Result};
use crate::quad::adaptive_simpson;
use crate::rng::RandomSource;

use std::f64::consts::LN_2;

/// Largest privacy budget this crate accepts. Both mechanism theorems hold
/// comfortably below this cap, so no per-mechanism epsilon condition needs
/// rechecking at call sites.
pub const MAX_EPSILON: f64 = 1.0;

/// A validated privacy budget, `0 < epsilon <= MAX_EPSILON`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrivacyBudget {
    epsilon: f64,
}

impl PrivacyBudget {
    /// Validates and wraps a budget.
    pub fn new(epsilon: f64) -> Result<Self> {
        if !epsilon.is_finite() || epsilon <= 0.0 || epsilon > MAX_EPSILON {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be in (0, {MAX_EPSILON}], got {epsilon}"
            )));
        }
        Ok(PrivacyBudget { epsilon })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Budget for one of `parts` sequentially composed sub-mechanisms.
    pub fn split(&self, parts: u32) -> PrivacyBudget {
        assert!(parts >= 1);
        PrivacyBudget {
            epsilon: self.epsilon / parts as f64,
        }
    }
}

/// Sensitivity declaration for one privatization.
///
/// `delta1` bounds the change of the exact target between neighboring
/// inputs, `delta2` bounds the estimator's error diameter (in the metric of
/// the chosen mechanism), and `k` is the number of adaptively chosen queries
/// that will share one random state. Both deltas must be finite and
/// nonnegative with a positive sum; `k >= 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SensitivitySpec {
    pub delta1: f64,
    pub delta2: f64,
    pub k: u32,
}

impl SensitivitySpec {
    pub fn new(delta1: f64, delta2: f64, k: u32) -> Result<Self> {
        let s = SensitivitySpec { delta1, delta2, k };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.delta1.is_finite()
            && self.delta2.is_finite()
            && self.delta1 >= 0.0
            && self.delta2 >= 0.0
            && self.delta1 + self.delta2 > 0.0
            && self.k >= 1;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "sensitivity spec requires finite delta1, delta2 >= 0 with positive sum \
                 and k >= 1, got delta1={} delta2={} k={}",
                self.delta1, self.delta2, self.k
            )))
        }
    }
}

/// Laplace calibration constant: `1 + 4 ln 2` for a single query,
/// `3 + 12 ln 2` when several adaptive queries share one random state.
pub fn laplace_c(k: u32) -> f64 {
    if k <= 1 {
        1.0 + 4.0 * LN_2
    } else {
        3.0 + 12.0 * LN_2
    }
}

/// Laplace noise scale for a subexponential-error estimator:
/// `c(k) * (delta1 + delta2) * k / epsilon`.
pub fn laplace_scale(sens: &SensitivitySpec, budget: &PrivacyBudget) -> Result<f64> {
    sens.validate()?;
    Ok(laplace_c(sens.k) * (sens.delta1 + sens.delta2) * sens.k as f64 / budget.epsilon())
}

/// Pareto calibration constant `alpha + 2 + 1/(alpha - 1)`.
pub fn zspareto_c(alpha: f64) -> Result<f64> {
    if !alpha.is_finite() || alpha <= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "pareto exponent alpha must be finite and > 1, got {alpha}"
        )));
    }
    Ok(alpha + 2.0 + 1.0 / (alpha - 1.0))
}

/// Zero-symmetric Pareto noise scale for a bounded-moment estimator:
/// `c(alpha) * (delta1 + delta2) / epsilon`. Single query only, so the
/// sensitivity spec must have `k = 1`.
pub fn zspareto_scale(alpha: f64, sens: &SensitivitySpec, budget: &PrivacyBudget) -> Result<f64> {
    sens.validate()?;
    if sens.k != 1 {
        return Err(Error::InvalidParameter(format!(
            "the pareto mechanism answers a single query, got k={}",
            sens.k
        )));
    }
    Ok(zspareto_c(alpha)? * (sens.delta1 + sens.delta2) / budget.epsilon())
}

fn check_scale(scale: f64) -> Result<()> {
    if !scale.is_finite() || scale <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "noise scale must be finite and positive, got {scale}"
        )));
    }
    Ok(())
}

/// Draws from the Laplace distribution with the given scale.
pub fn sample_laplace(scale: f64, rng: &mut RandomSource) -> f64 {
    let u = rng.open01() - 0.5;
    -scale * u.signum() * (1.0 - 2.0 * u.abs()).ln()
}

/// Laplace density.
pub fn laplace_pdf(scale: f64, x: f64) -> f64 {
    (-x.abs() / scale).exp() / (2.0 * scale)
}

/// Laplace distribution function.
pub fn laplace_cdf(scale: f64, x: f64) -> f64 {
    if x < 0.0 {
        0.5 * (x / scale).exp()
    } else {
        1.0 - 0.5 * (-x / scale).exp()
    }
}

/// Quantile of the magnitude of a zero-symmetric Pareto draw:
/// `|Y| = s * ((1 - u)^(-1/(alpha-1)) - 1)` for `u` in (0, 1).
pub fn zspareto_magnitude_quantile(alpha: f64, scale: f64, u: f64) -> f64 {
    scale * ((1.0 - u).powf(-1.0 / (alpha - 1.0)) - 1.0)
}

/// Draws from the zero-symmetric Pareto distribution by inverse transform
/// on the magnitude and an independent fair sign.
pub fn sample_zspareto(alpha: f64, scale: f64, rng: &mut RandomSource) -> f64 {
    let u = rng.open01();
    let mag = zspareto_magnitude_quantile(alpha, scale, u);
    if rng.coin() {
        mag
    } else {
        -mag
    }
}

/// Zero-symmetric Pareto density `(alpha-1)/(2s) * (|x|/s + 1)^(-alpha)`.
pub fn zspareto_pdf(alpha: f64, scale: f64, x: f64) -> f64 {
    (alpha - 1.0) / (2.0 * scale) * (x.abs() / scale + 1.0).powf(-alpha)
}

/// Zero-symmetric Pareto distribution function.
pub fn zspareto_cdf(alpha: f64, scale: f64, x: f64) -> f64 {
    if x >= 0.0 {
        1.0 - 0.5 * (1.0 + x / scale).powf(1.0 - alpha)
    } else {
        0.5 * (1.0 - x / scale).powf(1.0 - alpha)
    }
}

/// Distribution function of the magnitude: `P[|Y| <= t]`.
pub fn zspareto_abs_cdf(alpha: f64, scale: f64, t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        1.0 - (1.0 + t / scale).powf(1.0 - alpha)
    }
}

/// Validated sampler wrappers for callers holding runtime parameters.
pub fn checked_sample_laplace(scale: f64, rng: &mut RandomSource) -> Result<f64> {
    check_scale(scale)?;
    Ok(sample_laplace(scale, rng))
}

pub fn checked_sample_zspareto(alpha: f64, scale: f64, rng: &mut RandomSource) -> Result<f64> {
    zspareto_c(alpha)?;
    check_scale(scale)?;
    Ok(sample_zspareto(alpha, scale, rng))
}

/// Upper bound on the subexponential diameter of a sum of independent
/// variables: three times the sum of the individual diameters.
pub fn subexp_sum_bound(diameters: &[f64]) -> f64 {
    3.0 * diameters.iter().sum::<f64>()
}

/// Diameter bound after adding a deterministic shift `c`:
/// `diam(X + c) <= diam(X) + |c| / ln 2`.
pub fn shift_diameter(diameter: f64, shift: f64) -> f64 {
    diameter + shift.abs() / LN_2
}

/// Fits the subexponential diameter of an empirical sample: the smallest
/// `d` such that the empirical tail satisfies `P[|X| >= t] <= 2 exp(-t/d)`
/// on a 256-point grid over `[0, max |x|]`.
///
/// Returns 0 for an all-zero sample. Binary search to relative precision
/// 1e-3, returning the conservative (upper) end of the bracket.
pub fn fit_subexp_diameter(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InvalidParameter(
            "cannot fit a diameter to an empty sample".into(),
        ));
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter(
            "diameter fit requires finite samples".into(),
        ));
    }
    let mut abs: Vec<f64> = samples.iter().map(|x| x.abs()).collect();
    abs.sort_by(f64::total_cmp);
    let n = abs.len();
    let max = abs[n - 1];
    if max == 0.0 {
        return Ok(0.0);
    }
    // Empirical tail probability at each grid point.
    let grid: Vec<(f64, f64)> = (1..=255)
        .map(|j| {
            let t = max * j as f64 / 255.0;
            let below = abs.partition_point(|&a| a < t);
            (t, (n - below) as f64 / n as f64)
        })
        .collect();
    let feasible = |d: f64| {
        grid.iter()
            .all(|&(t, p)| p <= 2.0 * (-t / d).exp() + f64::EPSILON)
    };
    // max / ln 2 always dominates: the tail bound there is >= 1 everywhere.
    let mut lo = 0.0;
    let mut hi = max / LN_2;
    while hi - lo > 1e-3 * hi {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Total probability mass of the zero-symmetric Pareto density, computed by
/// quadrature on `[-T, T]` plus the closed-form tail beyond. Used by tests
/// to validate the density's normalization without relying on the CDF.
pub fn zspareto_mass_by_quadrature(alpha: f64, scale: f64, t_max: f64, tol: f64) -> f64 {
    let f = |x: f64| zspareto_pdf(alpha, scale, x);
    let body = 2.0 * adaptive_simpson(&f, 0.0, t_max, tol);
    let tail = (1.0 + t_max / scale).powf(1.0 - alpha);
    body + tail
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng(stream: u64) -> RandomSource {
        RandomSource::new(0x5eed_0001, stream)
    }

    fn budget(e: f64) -> PrivacyBudget {
        PrivacyBudget::new(e).unwrap()
    }

    #[test]
    fn budget_validation() {
        assert!(PrivacyBudget::new(1.0).is_ok());
        assert!(PrivacyBudget::new(1e-6).is_ok());
        assert!(PrivacyBudget::new(0.0).is_err());
        assert!(PrivacyBudget::new(-0.5).is_err());
        assert!(PrivacyBudget::new(1.000001).is_err());
        assert!(PrivacyBudget::new(f64::NAN).is_err());
    }

    #[test]
    fn laplace_scale_single_query() {
        let sens = SensitivitySpec::new(1.0, 0.0, 1).unwrap();
        let got = laplace_scale(&sens, &budget(1.0)).unwrap();
        assert!((got - 3.772588722239781).abs() < 1e-12, "got {got}");
    }

    #[test]
    fn laplace_scale_two_adaptive_queries() {
        let sens = SensitivitySpec::new(0.0, 1.0, 2).unwrap();
        let got = laplace_scale(&sens, &budget(1.0)).unwrap();
        assert!((got - 22.635532333438686).abs() < 1e-12, "got {got}");
    }

    #[test]
    fn laplace_multi_query_constant_is_triple_the_single_one() {
        // 3 + 12 ln 2 = 3 (1 + 4 ln 2), so two shared queries cost exactly
        // six times the scale of one stand-alone query.
        let one = laplace_scale(&SensitivitySpec::new(1.0, 0.0, 1).unwrap(), &budget(1.0)).unwrap();
        let two = laplace_scale(&SensitivitySpec::new(1.0, 0.0, 2).unwrap(), &budget(1.0)).unwrap();
        assert!((two / one - 6.0).abs() < 1e-12);
    }

    #[test]
    fn zspareto_scale_values() {
        let s1 = zspareto_scale(
            3.0,
            &SensitivitySpec::new(0.0, 1.0, 1).unwrap(),
            &budget(1.0),
        )
        .unwrap();
        assert!((s1 - 5.5).abs() < 1e-12, "got {s1}");
        let s2 = zspareto_scale(
            2.0,
            &SensitivitySpec::new(1.0, 1.0, 1).unwrap(),
            &budget(0.5),
        )
        .unwrap();
        assert!((s2 - 20.0).abs() < 1e-12, "got {s2}");
        let s3 = zspareto_scale(
            3.0,
            &SensitivitySpec::new(0.0, 0.01, 1).unwrap(),
            &budget(1.0),
        )
        .unwrap();
        assert!((s3 - 0.055).abs() < 1e-12, "got {s3}");
    }

    #[test]
    fn zspareto_scale_rejects_bad_parameters() {
        let sens = SensitivitySpec::new(0.0, 1.0, 1).unwrap();
        assert!(zspareto_scale(1.0, &sens, &budget(1.0)).is_err());
        assert!(zspareto_scale(0.5, &sens, &budget(1.0)).is_err());
        let multi = SensitivitySpec::new(0.0, 1.0, 3).unwrap();
        assert!(zspareto_scale(3.0, &multi, &budget(1.0)).is_err());
        assert!(SensitivitySpec::new(0.0, 0.0, 1).is_err());
        assert!(SensitivitySpec::new(-1.0, 1.0, 1).is_err());
        assert!(SensitivitySpec::new(1.0, 0.0, 0).is_err());
    }

    #[test]
    fn zspareto_quantile_frozen_point() {
        let got = zspareto_magnitude_quantile(3.0, 1.0, 0.5);
        assert!((got - (std::f64::consts::SQRT_2 - 1.0)).abs() < 1e-15, "got {got}");
    }

    #[test]
    fn zspareto_pdf_frozen_points() {
        assert!((zspareto_pdf(3.0, 1.0, 0.0) - 1.0).abs() < 1e-15);
        assert!((zspareto_pdf(3.0, 1.0, 1.0) - 0.125).abs() < 1e-15);
        assert!((zspareto_pdf(3.0, 1.0, -1.0) - 0.125).abs() < 1e-15);
    }

    #[test]
    fn zspareto_density_normalizes() {
        for &alpha in &[2.0, 3.0, 5.0] {
            for &s in &[0.5, 1.0, 5.0] {
                let mass = zspareto_mass_by_quadrature(alpha, s, 100.0 * s, 1e-9);
                assert!(
                    (mass - 1.0).abs() < 1e-6,
                    "alpha={alpha} s={s} mass={mass}"
                );
            }
        }
    }

    #[test]
    fn zspareto_cdf_matches_quantile_and_symmetry() {
        let (alpha, s) = (3.0, 2.0);
        assert!((zspareto_cdf(alpha, s, 0.0) - 0.5).abs() < 1e-15);
        for i in 1..50 {
            let u = i as f64 / 50.0;
            let t = zspareto_magnitude_quantile(alpha, s, u);
            assert!((zspareto_abs_cdf(alpha, s, t) - u).abs() < 1e-10);
            // Sign symmetry of the full CDF.
            let up = zspareto_cdf(alpha, s, t);
            let dn = zspareto_cdf(alpha, s, -t);
            assert!((up + dn - 1.0).abs() < 1e-12);
        }
    }

    fn ks_statistic(draws: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
        draws.sort_by(f64::total_cmp);
        let n = draws.len() as f64;
        let mut d: f64 = 0.0;
        for (i, &x) in draws.iter().enumerate() {
            let f = cdf(x);
            d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
        }
        d
    }

    #[test]
    fn laplace_sampler_matches_cdf() {
        let mut r = rng(1);
        let scale = 1.7;
        let mut draws: Vec<f64> = (0..100_000).map(|_| sample_laplace(scale, &mut r)).collect();
        let d = ks_statistic(&mut draws, |x| laplace_cdf(scale, x));
        assert!(d < 0.006, "ks {d}");
    }

    #[test]
    fn zspareto_sampler_matches_cdf() {
        let mut r = rng(2);
        let (alpha, s) = (3.0, 1.0);
        let mut draws: Vec<f64> = (0..100_000)
            .map(|_| sample_zspareto(alpha, s, &mut r))
            .collect();
        let d = ks_statistic(&mut draws, |x| zspareto_cdf(alpha, s, x));
        assert!(d < 0.006, "ks {d}");
    }

    #[test]
    fn zspareto_alpha3_mean_magnitude_is_the_scale() {
        let mut r = rng(3);
        let s = 2.5;
        let n = 200_000;
        let mean: f64 = (0..n)
            .map(|_| sample_zspareto(3.0, s, &mut r).abs())
            .sum::<f64>()
            / n as f64;
        assert!((mean / s - 1.0).abs() < 0.04, "mean {mean}");
    }

    #[test]
    fn subexp_sum_bound_frozen() {
        assert_eq!(subexp_sum_bound(&[1.0, 2.0, 3.0]), 18.0);
        assert_eq!(subexp_sum_bound(&[]), 0.0);
    }

    #[test]
    fn shift_diameter_frozen() {
        let got = shift_diameter(2.0, 1.0);
        assert!((got - 3.4426950408889634).abs() < 1e-12, "got {got}");
        assert_eq!(shift_diameter(2.0, -1.0), shift_diameter(2.0, 1.0));
    }

    #[test]
    fn fit_diameter_of_laplace_samples() {
        // The Laplace(b) tail is exp(-t/b), so the fitted diameter should
        // land just under b, and never above it by more than the fit slack.
        let mut r = rng(0);
        let b = 2.0;
        let draws: Vec<f64> = (0..1_000_000).map(|_| sample_laplace(b, &mut r)).collect();
        let d = fit_subexp_diameter(&draws).unwrap();
        assert!(d >= 0.95 * b && d <= 1.3 * b, "fit {d}");
    }

    #[test]
    fn fit_diameter_scales_linearly() {
        let mut r = rng(5);
        let draws: Vec<f64> = (0..20_000).map(|_| sample_laplace(1.0, &mut r)).collect();
        let scaled: Vec<f64> = draws.iter().map(|x| 7.0 * x).collect();
        let d1 = fit_subexp_diameter(&draws).unwrap();
        let d7 = fit_subexp_diameter(&scaled).unwrap();
        assert!((d7 / d1 - 7.0).abs() < 1e-6 * 7.0, "{d1} {d7}");
    }

    #[test]
    fn fit_diameter_edge_cases() {
        assert_eq!(fit_subexp_diameter(&[0.0, 0.0, 0.0]).unwrap(), 0.0);
        assert!(fit_subexp_diameter(&[]).is_err());
        assert!(fit_subexp_diameter(&[1.0, f64::NAN]).is_err());
        // A point mass at 1 needs d = 1/ln 2 at the top grid point.
        let d = fit_subexp_diameter(&[1.0, -1.0, 1.0]).unwrap();
        assert!((d - 1.0 / LN_2).abs() < 2e-3, "fit {d}");
    }

    #[test]
    fn checked_samplers_validate() {
        let mut r = rng(6);
        assert!(checked_sample_laplace(0.0, &mut r).is_err());
        assert!(checked_sample_laplace(f64::INFINITY, &mut r).is_err());
        assert!(checked_sample_zspareto(1.0, 1.0, &mut r).is_err());
        assert!(checked_sample_zspareto(3.0, -1.0, &mut r).is_err());
        assert!(checked_sample_zspareto(3.0, 1.0, &mut r).is_ok());
    }
}
