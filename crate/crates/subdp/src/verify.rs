//! Numerical verifiers for the distributional facts the mechanisms rely on.
//!
//! Each verifier checks one inequality the noise calibration depends on,
//! either by quadrature (deterministic) or by Monte-Carlo estimation with
//! an explicit three-standard-error slack. A verifier reports the worst
//! margin across its grid; a negative margin is a failure. All verifiers
//! are deterministic given their seed, trial count, and grids.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::noise::{fit_subexp_diameter, sample_laplace, sample_zspareto};
use crate::privatize::median_in_place;
use crate::quad::adaptive_simpson;
use crate::rng::RandomSource;

/// Stream tag separating verifier draws from other consumers of a seed.
const VERIFY_STREAM: u64 = 0xFAC7;

/// Outcome of one verifier: every sub-check passed iff `worst_margin >= 0`.
#[derive(Clone, Debug, Serialize)]
pub struct Verification {
    pub name: String,
    pub passed: bool,
    /// Number of sub-checks (grid points times bound sides).
    pub checks: usize,
    /// Smallest slack-adjusted margin over all sub-checks.
    pub worst_margin: f64,
    /// Identifies the sub-check attaining the worst margin.
    pub detail: String,
}

/// Accumulates labeled margins and reduces them to a [`Verification`].
struct Checks {
    items: Vec<(String, f64)>,
}

impl Checks {
    fn new() -> Checks {
        Checks { items: Vec::new() }
    }

    fn push(&mut self, label: String, margin: f64) {
        self.items.push((label, margin));
    }

    fn finish(self, name: &str) -> Verification {
        let (label, worst) = self
            .items
            .iter()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(l, m)| (l.clone(), *m))
            .expect("a verifier must perform at least one check");
        Verification {
            name: name.to_string(),
            passed: worst >= 0.0 && worst.is_finite(),
            checks: self.items.len(),
            worst_margin: worst,
            detail: format!("worst at {label}: margin {worst:.6e}"),
        }
    }
}

fn require(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter(msg.to_string()))
    }
}

/// Mean and standard error of the mean from running sums.
fn mean_se(sum: f64, sum_sq: f64, n: f64) -> (f64, f64) {
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0);
    (mean, (var / n).sqrt())
}

/// Checks the exponential-expectation bounds for a subexponential variable:
/// a diameter-`delta` variable with `delta <= 1/2` satisfies
/// `E[exp(-|X|)] >= 2^-delta / (1 + delta)` and
/// `E[exp(|X|)] <= 2^delta / (1 - delta)`, and those two quantities are in
/// turn bounded by `exp(-(1 + ln 2) delta)` and `exp(3 ln(2) delta)`.
///
/// The Monte-Carlo check draws X from the Laplace distribution with scale
/// `delta`, whose tail `P[|X| >= t] = exp(-t/delta)` certifies the
/// diameter; the chained closed-form comparisons are deterministic.
pub fn verify_exp_expectation_bounds(
    delta: f64,
    trials: u64,
    rng: &mut RandomSource,
) -> Result<Verification> {
    require(
        delta.is_finite() && delta > 0.0 && delta <= 0.5,
        "the exponential-expectation bounds need a diameter in (0, 1/2]",
    )?;
    require(trials >= 1000, "too few trials for a stable standard error")?;

    let (mut sum_neg, mut sq_neg, mut sum_pos, mut sq_pos) = (0.0, 0.0, 0.0, 0.0);
    for _ in 0..trials {
        let a = sample_laplace(delta, rng).abs();
        let eneg = (-a).exp();
        let epos = a.exp();
        sum_neg += eneg;
        sq_neg += eneg * eneg;
        sum_pos += epos;
        sq_pos += epos * epos;
    }
    let n = trials as f64;
    let (mean_neg, se_neg) = mean_se(sum_neg, sq_neg, n);
    let (mean_pos, se_pos) = mean_se(sum_pos, sq_pos, n);

    let lower = (-delta).exp2() / (1.0 + delta);
    let upper = delta.exp2() / (1.0 - delta);
    let floor = (-(1.0 + std::f64::consts::LN_2) * delta).exp();
    let cap = (3.0 * std::f64::consts::LN_2 * delta).exp();

    let mut checks = Checks::new();
    checks.push(
        format!("E[exp(-|X|)] >= 2^-d/(1+d), d={delta}"),
        mean_neg + 3.0 * se_neg - lower,
    );
    checks.push(
        format!("E[exp(|X|)] <= 2^d/(1-d), d={delta}"),
        upper - (mean_pos - 3.0 * se_pos),
    );
    // Both chained comparisons are exact arithmetic identities at the
    // boundary d = 1/2 (that equality fixes the constants), so give the
    // two float evaluations an ulp-scale allowance.
    checks.push(
        format!("2^-d/(1+d) >= exp(-(1+ln2)d), d={delta}"),
        lower - floor + 1e-12,
    );
    checks.push(
        format!("2^d/(1-d) <= exp(3 ln(2) d), d={delta}"),
        cap - upper + 1e-12,
    );
    Ok(checks.finish(&format!("exp-expectation d={delta}")))
}

/// Left side of the heavy-tail integral inequality at one grid point:
/// `I = integral over u in [0,1] of
/// min((1+x)^a, |1 - (1 - 2^(-1/a)) e / ((1+x)(1-u)^(1/a))|^(-a)) du`.
///
/// The substitution `t = (1-u)^(1/a)` turns the integrand into a smooth
/// rational function times `a t^(a-1)` and moves the singular point to
/// `t = K` where the min caps it; the capped stretch integrates in closed
/// form and the two smooth flanks go to adaptive quadrature.
fn integral_lhs(alpha: f64, epsilon: f64, x: f64, tol: f64) -> f64 {
    let coeff = 1.0 - (-1.0 / alpha).exp2();
    let k = coeff * epsilon / (1.0 + x);
    if k == 0.0 {
        return 1.0;
    }
    let cap = (1.0 + x).powf(alpha);
    // The min takes the cap exactly where |1 - K/t| <= 1/(1+x).
    let t1 = (k * (1.0 + x) / (x + 2.0)).min(1.0);
    let t2 = if x > 0.0 {
        (k * (1.0 + x) / x).min(1.0)
    } else {
        1.0
    };
    let below = adaptive_simpson(
        &|t: f64| (t / (k - t)).powf(alpha) * alpha * t.powf(alpha - 1.0),
        0.0,
        t1,
        tol,
    );
    let capped = cap * (t2.powf(alpha) - t1.powf(alpha));
    let above = if t2 < 1.0 {
        adaptive_simpson(
            &|t: f64| (t / (t - k)).powf(alpha) * alpha * t.powf(alpha - 1.0),
            t2,
            1.0,
            tol,
        )
    } else {
        0.0
    };
    below + capped + above
}

/// Checks the integral inequality `I <= 1 + (2a-1)/(a-1) * e` on a grid of
/// `alpha > 1`, `0 <= epsilon <= 1`, `x >= 0`, with `slack` absolute
/// tolerance on the right side. Quadrature is deterministic, so the slack
/// only needs to cover the 1e-8 integration tolerance.
pub fn verify_integral_bound(
    alphas: &[f64],
    epsilons: &[f64],
    xs: &[f64],
    slack: f64,
) -> Result<Verification> {
    require(
        !alphas.is_empty() && !epsilons.is_empty() && !xs.is_empty(),
        "the integral bound needs nonempty grids",
    )?;
    require(slack >= 0.0, "slack must be nonnegative")?;
    for &a in alphas {
        require(a.is_finite() && a > 1.0, "alpha must exceed 1")?;
    }
    for &e in epsilons {
        require(
            e.is_finite() && (0.0..=1.0).contains(&e),
            "epsilon must lie in [0, 1]",
        )?;
    }
    for &x in xs {
        require(x.is_finite() && x >= 0.0, "x must be nonnegative")?;
    }

    let mut checks = Checks::new();
    for &alpha in alphas {
        for &epsilon in epsilons {
            for &x in xs {
                let lhs = integral_lhs(alpha, epsilon, x, 5e-9);
                let rhs = 1.0 + (2.0 * alpha - 1.0) / (alpha - 1.0) * epsilon;
                checks.push(format!("a={alpha} e={epsilon} x={x}"), rhs + slack - lhs);
            }
        }
    }
    Ok(checks.finish("integral-bound"))
}

/// Shared Monte-Carlo loop for the density-ratio verifiers: estimates
/// `f_{X+Y}(y) / f_Y(y) = E[f_Y(y - X) / f_Y(y)]` at each grid point from
/// one shared set of contaminant draws and checks it against constant
/// bounds with three standard errors of slack.
fn ratio_bounds_on_grid<R>(
    per_draw_ratio: R,
    xs: &[f64],
    span: f64,
    grid_points: usize,
    lower: f64,
    upper: f64,
    checks: &mut Checks,
) where
    R: Fn(f64, f64) -> f64,
{
    let n = xs.len() as f64;
    for i in 0..grid_points {
        let y = -span + 2.0 * span * i as f64 / (grid_points - 1) as f64;
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for &x in xs {
            let r = per_draw_ratio(y, x);
            sum += r;
            sum_sq += r * r;
        }
        let (mean, se) = mean_se(sum, sum_sq, n);
        checks.push(format!("upper at y={y:.3}"), upper - (mean - 3.0 * se));
        checks.push(format!("lower at y={y:.3}"), mean + 3.0 * se - lower);
    }
}

/// Checks the Laplace density-ratio bounds for a single query: with X of
/// subexponential diameter at most `delta` and `Y ~ Laplace(delta /
/// epsilon)`, `epsilon <= 1/2`, the convolution density satisfies
/// `exp(-(1 + ln 2) epsilon) <= f_{X+Y}(y) / f_Y(y) <= exp(3 ln(2)
/// epsilon)` everywhere. X is drawn Laplace with scale `delta`, which
/// certifies the diameter; the grid spans `[-20b, 20b]`.
pub fn verify_laplace_density_ratio(
    delta: f64,
    epsilon: f64,
    grid_points: usize,
    trials: u64,
    rng: &mut RandomSource,
) -> Result<Verification> {
    require(
        delta.is_finite() && delta > 0.0,
        "the density ratio needs a positive diameter",
    )?;
    require(
        epsilon.is_finite() && epsilon > 0.0 && epsilon <= 0.5,
        "the single-query Laplace ratio bounds hold for epsilon in (0, 1/2]",
    )?;
    require(grid_points >= 2, "need at least two grid points")?;
    require(trials >= 1000, "too few trials for a stable standard error")?;

    let scale = delta / epsilon;
    let xs: Vec<f64> = (0..trials).map(|_| sample_laplace(delta, rng)).collect();
    let lower = (-(1.0 + std::f64::consts::LN_2) * epsilon).exp();
    let upper = (3.0 * std::f64::consts::LN_2 * epsilon).exp();

    let mut checks = Checks::new();
    ratio_bounds_on_grid(
        |y: f64, x: f64| ((y.abs() - (y - x).abs()) / scale).exp(),
        &xs,
        20.0 * scale,
        grid_points,
        lower,
        upper,
        &mut checks,
    );
    Ok(checks.finish(&format!("laplace-density-ratio d={delta} e={epsilon}")))
}

/// Checks the heavy-tail density-ratio bounds: with `E[|X|^alpha] <=
/// delta^alpha` and `Y` zero-symmetric Pareto with scale `s = delta /
/// ((1 - 2^(-1/alpha)) epsilon)`, `epsilon <= 1`, the convolution density
/// satisfies `exp(-(1 - 2^(-1/alpha)) alpha epsilon) <= f_{X+Y}(y) /
/// f_Y(y) <= exp((2 alpha - 1)/(alpha - 1) epsilon)`. X is drawn Laplace
/// with scale `delta / Gamma(alpha + 1)^(1/alpha)`, whose alpha-th
/// absolute moment is exactly `delta^alpha`; the grid spans `[-20s, 20s]`.
pub fn verify_pareto_density_ratio(
    alpha: f64,
    delta: f64,
    epsilon: f64,
    grid_points: usize,
    trials: u64,
    rng: &mut RandomSource,
) -> Result<Verification> {
    require(alpha.is_finite() && alpha > 1.0, "alpha must exceed 1")?;
    require(
        delta.is_finite() && delta > 0.0,
        "the density ratio needs a positive moment bound",
    )?;
    require(
        epsilon.is_finite() && epsilon > 0.0 && epsilon <= 1.0,
        "the heavy-tail ratio bounds hold for epsilon in (0, 1]",
    )?;
    require(grid_points >= 2, "need at least two grid points")?;
    require(trials >= 1000, "too few trials for a stable standard error")?;

    let coeff = 1.0 - (-1.0 / alpha).exp2();
    let s = delta / (coeff * epsilon);
    let contaminant_scale = delta / libm::tgamma(alpha + 1.0).powf(1.0 / alpha);
    let xs: Vec<f64> = (0..trials)
        .map(|_| sample_laplace(contaminant_scale, rng))
        .collect();
    let lower = (-coeff * alpha * epsilon).exp();
    let upper = ((2.0 * alpha - 1.0) / (alpha - 1.0) * epsilon).exp();

    let int_alpha = alpha.fract() == 0.0 && alpha <= 16.0;
    let alpha_i = alpha as i32;
    let mut checks = Checks::new();
    ratio_bounds_on_grid(
        |y: f64, x: f64| {
            let base = (s + y.abs()) / (s + (y - x).abs());
            if int_alpha {
                base.powi(alpha_i)
            } else {
                base.powf(alpha)
            }
        },
        &xs,
        20.0 * s,
        grid_points,
        lower,
        upper,
        &mut checks,
    );
    Ok(checks.finish(&format!(
        "pareto-density-ratio a={alpha} d={delta} e={epsilon}"
    )))
}

/// Dependence structure for the summands of [`verify_subexp_sum`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SumDependence {
    /// Summands drawn independently.
    Independent,
    /// Summands are deterministic multiples of one shared draw, the
    /// worst case the sum bound must still cover.
    Comonotone,
}

/// Checks the sum rule for subexponential diameters: the diameter of
/// `X_1 + ... + X_k` is at most three times the sum of the individual
/// diameters, regardless of dependence. Summands are Laplace with the
/// certified diameters; the fitted diameter of the empirical sum must stay
/// under the bound with 10% sampling slack.
pub fn verify_subexp_sum(
    diameters: &[f64],
    dependence: SumDependence,
    trials: u64,
    rng: &mut RandomSource,
) -> Result<Verification> {
    require(
        !diameters.is_empty() && diameters.len() <= 10,
        "the sum rule check supports 1 to 10 summands",
    )?;
    for &d in diameters {
        require(d.is_finite() && d >= 0.0, "diameters must be nonnegative")?;
    }
    require(trials >= 1000, "too few trials for a stable tail fit")?;

    let samples: Vec<f64> = (0..trials)
        .map(|_| match dependence {
            SumDependence::Independent => {
                diameters.iter().map(|&d| sample_laplace(d, rng)).sum()
            }
            SumDependence::Comonotone => {
                let shared = sample_laplace(1.0, rng);
                diameters.iter().map(|&d| d * shared).sum()
            }
        })
        .collect();
    let fitted = fit_subexp_diameter(&samples)?;
    let bound = 1.1 * 3.0 * diameters.iter().sum::<f64>();

    let mut checks = Checks::new();
    checks.push(
        format!("fitted {fitted:.4} vs 3*sum bound ({dependence:?})"),
        bound - fitted,
    );
    Ok(checks.finish(&format!(
        "subexp-sum k={} {dependence:?}",
        diameters.len()
    )))
}

/// Checks the median expectation bound for nonnegative i.i.d. variables:
/// `E[median(X_1, ..., X_{2k-1})] <= 2 * C(2k-1, k) * E[X_1]`. Both sides
/// are estimated from the same draws and compared with three combined
/// standard errors of slack.
pub fn verify_median_expectation<S>(
    mut sampler: S,
    k: u32,
    trials: u64,
    rng: &mut RandomSource,
) -> Result<Verification>
where
    S: FnMut(&mut RandomSource) -> f64,
{
    require((1..=10).contains(&k), "the median bound check supports k in 1..=10")?;
    require(trials >= 1000, "too few trials for a stable standard error")?;

    let m = (2 * k - 1) as usize;
    let factor = 2.0 * binomial(2 * k as u64 - 1, k as u64) as f64;
    let mut buf = vec![0.0; m];
    let (mut sum_med, mut sq_med, mut sum_one, mut sq_one) = (0.0, 0.0, 0.0, 0.0);
    for _ in 0..trials {
        for slot in buf.iter_mut() {
            let x = sampler(rng);
            if !x.is_finite() || x < 0.0 {
                return Err(Error::InvalidParameter(
                    "the median bound needs a nonnegative finite sampler".into(),
                ));
            }
            *slot = x;
            sum_one += x;
            sq_one += x * x;
        }
        let med = median_in_place(&mut buf);
        sum_med += med;
        sq_med += med * med;
    }
    let (mean_med, se_med) = mean_se(sum_med, sq_med, trials as f64);
    let (mean_one, se_one) = mean_se(sum_one, sq_one, (trials as usize * m) as f64);
    let se = (se_med * se_med + factor * factor * se_one * se_one).sqrt();

    let mut checks = Checks::new();
    checks.push(
        format!("E[median of {m}] <= {factor} E[X]"),
        factor * mean_one + 3.0 * se - mean_med,
    );
    Ok(checks.finish(&format!("median-expectation k={k}")))
}

fn binomial(n: u64, r: u64) -> u64 {
    let r = r.min(n - r);
    let mut acc = 1u64;
    for i in 1..=r {
        acc = acc * (n - r + i) / i;
    }
    acc
}

/// Names accepted by [`run_verifier`], besides `all`.
pub const VERIFIER_NAMES: &[&str] = &[
    "exp-expectation",
    "integral-bound",
    "density-ratio",
    "subexp-sum",
    "median-expectation",
];

/// Runs a named verifier suite at its default grids.
///
/// `trials` scales the Monte-Carlo verifiers (quadrature ignores it);
/// `seed` pins every random stream. `all` runs the full battery.
pub fn run_verifier(name: &str, trials: u64, seed: u64) -> Result<Vec<Verification>> {
    let base = RandomSource::new(seed, VERIFY_STREAM);
    let mut out = Vec::new();
    let known = VERIFIER_NAMES.contains(&name) || name == "all";
    if !known {
        return Err(Error::InvalidParameter(format!(
            "unknown verifier {name:?}; valid names: all, {}",
            VERIFIER_NAMES.join(", ")
        )));
    }

    if name == "all" || name == "exp-expectation" {
        for (j, &delta) in [0.1, 0.25, 0.5].iter().enumerate() {
            let mut rng = base.substream(10 + j as u64);
            out.push(verify_exp_expectation_bounds(delta, trials, &mut rng)?);
        }
    }
    if name == "all" || name == "integral-bound" {
        out.push(verify_integral_bound(
            &[1.5, 2.0, 3.0, 5.0],
            &[0.0, 0.1, 0.5, 1.0],
            &[0.0, 1.0, 10.0, 100.0],
            1e-6,
        )?);
    }
    if name == "all" || name == "density-ratio" {
        let mut rng = base.substream(30);
        out.push(verify_laplace_density_ratio(1.0, 0.25, 200, trials, &mut rng)?);
        let mut rng = base.substream(31);
        out.push(verify_laplace_density_ratio(1.0, 0.5, 200, trials, &mut rng)?);
        let mut rng = base.substream(32);
        out.push(verify_pareto_density_ratio(3.0, 1.0, 0.5, 200, trials, &mut rng)?);
        let mut rng = base.substream(33);
        out.push(verify_pareto_density_ratio(3.0, 1.0, 1.0, 200, trials, &mut rng)?);
    }
    if name == "all" || name == "subexp-sum" {
        let mut rng = base.substream(40);
        out.push(verify_subexp_sum(
            &[1.0, 2.0, 3.0],
            SumDependence::Independent,
            trials,
            &mut rng,
        )?);
        let mut rng = base.substream(41);
        out.push(verify_subexp_sum(
            &[1.0, 1.0],
            SumDependence::Independent,
            trials,
            &mut rng,
        )?);
        let mut rng = base.substream(42);
        out.push(verify_subexp_sum(
            &[0.5; 5],
            SumDependence::Comonotone,
            trials,
            &mut rng,
        )?);
        let mut rng = base.substream(43);
        out.push(verify_subexp_sum(
            &[0.0],
            SumDependence::Independent,
            trials,
            &mut rng,
        )?);
    }
    if name == "all" || name == "median-expectation" {
        let mut rng = base.substream(50);
        out.push(verify_median_expectation(|_| 1.0, 1, trials, &mut rng)?);
        let mut rng = base.substream(51);
        out.push(verify_median_expectation(
            |r: &mut RandomSource| sample_laplace(1.0, r).abs(),
            3,
            trials,
            &mut rng,
        )?);
        let mut rng = base.substream(52);
        out.push(verify_median_expectation(
            |r: &mut RandomSource| sample_zspareto(3.0, 1.0, r).abs(),
            3,
            trials,
            &mut rng,
        )?);
        let mut rng = base.substream(53);
        out.push(verify_median_expectation(
            |r: &mut RandomSource| sample_laplace(1.0, r).abs(),
            5,
            trials,
            &mut rng,
        )?);
    }
    Ok(out)
}
