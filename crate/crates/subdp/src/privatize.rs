//! Privatization of randomized approximation algorithms.
//!
//! The entry points here take an estimator that already makes an accuracy
//! promise about its own randomness and add just enough calibrated noise to
//! make the combined output differentially private. The estimator's error
//! declaration does double duty: it is the `delta2` term of the noise scale,
//! so most of the privacy cost rides on error the caller was already
//! accepting.
//!
//! Estimators declare their error law through [`ErrorKind`]:
//!
//! * [`ErrorKind::Subexponential`]: the error has an exponential tail with
//!   diameter `error_scale`. Privatized with Laplace noise; supports
//!   multi-query sessions via [`open_session`].
//! * [`ErrorKind::MomentBound`]: only the `alpha`-th absolute error moment
//!   is bounded by `error_scale^alpha`. Privatized with zero-symmetric
//!   Pareto noise whose polynomial tail matches the estimator's, so the
//!   noise cannot dominate the failure probability.

use crate::error::{Error, Result};
use crate::noise::{
    laplace_c, laplace_scale, sample_laplace, sample_zspareto, zspareto_c, zspareto_scale,
    PrivacyBudget, SensitivitySpec,
};
use crate::rng::RandomSource;

use serde::Serialize;

/// Error law an estimator promises for `estimate - target`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ErrorKind {
    /// Subexponential tail: `P[|err| >= t] <= 2 exp(-t / error_scale)`.
    Subexponential,
    /// Bounded moment: `E[|err|^alpha] <= error_scale^alpha`, `alpha >= 1`.
    MomentBound { alpha: f64 },
}

/// A randomized approximation algorithm with a quantified error promise.
///
/// `error_scale(input, rho)` must be finite, nonnegative, and positively
/// homogeneous in `rho` (halving `rho` halves the scale); every scheduling
/// decision in this module relies on that linearity. `sensitivity` is the
/// worst-case change of the exact target between neighboring inputs under
/// the estimator's neighbor relation.
pub trait ApproxEstimator {
    type Input: ?Sized;

    /// Runs the estimator at accuracy `rho` on fresh randomness.
    fn evaluate(&self, input: &Self::Input, rho: f64, rng: &mut RandomSource) -> Result<f64>;

    /// Error scale promised at accuracy `rho`: a subexponential diameter or
    /// an `alpha`-norm bound, depending on [`Self::kind`].
    fn error_scale(&self, input: &Self::Input, rho: f64) -> f64;

    fn kind(&self) -> ErrorKind;

    /// Query sensitivity `delta1` of the exact target.
    fn sensitivity(&self) -> f64;
}

/// Noise mechanism actually applied, echoed in results for reporting.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "mechanism", rename_all = "snake_case")]
pub enum MechanismSpec {
    Laplace {
        scale: f64,
        c: f64,
        epsilon: f64,
        k: u32,
        delta1: f64,
        delta2: f64,
    },
    ZsPareto {
        scale: f64,
        c: f64,
        alpha: f64,
        epsilon: f64,
        delta1: f64,
        delta2: f64,
    },
}

impl MechanismSpec {
    pub fn scale(&self) -> f64 {
        match self {
            MechanismSpec::Laplace { scale, .. } => *scale,
            MechanismSpec::ZsPareto { scale, .. } => *scale,
        }
    }
}

/// A differentially private estimate with its mechanism record.
#[derive(Clone, Debug, Serialize)]
pub struct PrivateEstimate {
    pub value: f64,
    pub mechanism: MechanismSpec,
    /// Total privacy budget consumed across all runs.
    pub epsilon_spent: f64,
    /// Number of independent privatized runs medianed together.
    pub runs: u32,
    /// Accuracy each run was executed at.
    pub rho_run: f64,
}

fn validate_rho(rho: f64) -> Result<()> {
    if !rho.is_finite() || rho <= 0.0 || rho > 1.0 {
        return Err(Error::InvalidParameter(format!(
            "accuracy rho must be in (0, 1], got {rho}"
        )));
    }
    Ok(())
}

fn validate_scale_decl(delta1: f64, delta2: f64) -> Result<()> {
    if !delta1.is_finite() || delta1 < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "estimator sensitivity must be finite and nonnegative, got {delta1}"
        )));
    }
    if !delta2.is_finite() || delta2 < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "estimator error scale must be finite and nonnegative, got {delta2}"
        )));
    }
    Ok(())
}

/// Privatizes a single run of `est` at accuracy `rho`.
///
/// Refuses with [`Error::RegimeViolation`] when the sensitivity term alone
/// exceeds the estimator's own error order (`delta1 > epsilon * delta2`),
/// because the noise would then dominate the answer; `force` overrides the
/// refusal and applies the honestly calibrated (large) noise anyway.
pub fn privatize_once<E: ApproxEstimator>(
    est: &E,
    input: &E::Input,
    rho: f64,
    budget: &PrivacyBudget,
    force: bool,
    rng: &mut RandomSource,
) -> Result<PrivateEstimate> {
    validate_rho(rho)?;
    let delta1 = est.sensitivity();
    let delta2 = est.error_scale(input, rho);
    validate_scale_decl(delta1, delta2)?;
    let eps = budget.epsilon();
    if delta1 > eps * delta2 && !force {
        return Err(Error::RegimeViolation(format!(
            "sensitivity {delta1} exceeds epsilon * error_scale = {}; \
             the calibrated noise would dominate the estimate (pass force to proceed)",
            eps * delta2
        )));
    }
    let sens = SensitivitySpec::new(delta1, delta2, 1)?;
    let raw = est.evaluate(input, rho, rng)?;
    let (noisy, mechanism) = match est.kind() {
        ErrorKind::Subexponential => {
            let scale = laplace_scale(&sens, budget)?;
            (
                raw + sample_laplace(scale, rng),
                MechanismSpec::Laplace {
                    scale,
                    c: laplace_c(1),
                    epsilon: eps,
                    k: 1,
                    delta1,
                    delta2,
                },
            )
        }
        ErrorKind::MomentBound { alpha } => {
            let scale = zspareto_scale(alpha, &sens, budget)?;
            (
                raw + sample_zspareto(alpha, scale, rng),
                MechanismSpec::ZsPareto {
                    scale,
                    c: zspareto_c(alpha)?,
                    alpha,
                    epsilon: eps,
                    delta1,
                    delta2,
                },
            )
        }
    };
    Ok(PrivateEstimate {
        value: noisy,
        mechanism,
        epsilon_spent: eps,
        runs: 1,
        rho_run: rho,
    })
}

/// Median-of-five error amplifier.
///
/// Wraps a bounded-moment estimator so that five independent runs are
/// medianed into one answer whose third absolute error moment is bounded:
/// if each run has mean absolute error at most `m`, the median's third
/// moment is at most `10 m^3`. The wrapper therefore declares
/// `MomentBound { alpha: 3 }` with error scale `10^(1/3)` times the inner
/// scale, which is what the Pareto mechanism wants.
pub struct MedianAmplified<E> {
    inner: E,
}

/// Cube root of ten: the error-scale growth of the median-of-five wrapper.
pub const MEDIAN5_FACTOR: f64 = 2.154434690031884;

/// Wraps `est` in the median-of-five amplifier.
///
/// The inner estimator must declare `MomentBound` with `alpha >= 1`: the
/// amplification lemma consumes a mean-absolute-error bound, which any
/// declared moment of order at least one implies.
pub fn median_amplify<E: ApproxEstimator>(est: E) -> Result<MedianAmplified<E>> {
    match est.kind() {
        ErrorKind::MomentBound { alpha } if alpha >= 1.0 => Ok(MedianAmplified { inner: est }),
        ErrorKind::MomentBound { alpha } => Err(Error::InvalidParameter(format!(
            "median amplification requires a moment of order >= 1, got alpha={alpha}"
        ))),
        ErrorKind::Subexponential => Err(Error::InvalidParameter(
            "median amplification applies to moment-bounded estimators only".into(),
        )),
    }
}

pub(crate) fn median_in_place(values: &mut [f64]) -> f64 {
    debug_assert!(!values.is_empty() && values.len() % 2 == 1);
    values.sort_by(f64::total_cmp);
    values[values.len() / 2]
}

impl<E: ApproxEstimator> ApproxEstimator for MedianAmplified<E> {
    type Input = E::Input;

    fn evaluate(&self, input: &Self::Input, rho: f64, rng: &mut RandomSource) -> Result<f64> {
        let mut runs = [0.0; 5];
        for slot in runs.iter_mut() {
            *slot = self.inner.evaluate(input, rho, rng)?;
        }
        Ok(median_in_place(&mut runs))
    }

    fn error_scale(&self, input: &Self::Input, rho: f64) -> f64 {
        MEDIAN5_FACTOR * self.inner.error_scale(input, rho)
    }

    fn kind(&self) -> ErrorKind {
        ErrorKind::MomentBound { alpha: 3.0 }
    }

    fn sensitivity(&self) -> f64 {
        self.inner.sensitivity()
    }
}

/// Number of medianed runs used to reach failure probability `beta`:
/// one run when `beta > 1/3`, otherwise `2 ceil(ln(1/beta) / ln 3) + 1`.
///
/// The ceiling is taken with a small tolerance so that representable
/// approximations of round numbers (such as `beta = 1/3`) land on the
/// intended run count.
pub fn boost_runs(beta: f64) -> u32 {
    if beta > 1.0 / 3.0 {
        1
    } else {
        let ratio = -beta.ln() / 3.0f64.ln();
        2 * ((ratio - 1e-9).ceil() as u32) + 1
    }
}

/// Upper tail of Binomial(t, p): probability of at least `j0` successes.
fn binomial_tail(t: u32, p: f64, j0: u32) -> f64 {
    let mut total = 0.0;
    let mut log_choose = 0.0f64;
    // log C(t, j) built incrementally from j = 0.
    for j in 0..=t {
        if j >= j0 {
            total += (log_choose
                + j as f64 * p.ln()
                + (t - j) as f64 * (1.0 - p).ln())
            .exp();
        }
        if j < t {
            log_choose += ((t - j) as f64).ln() - ((j + 1) as f64).ln();
        }
    }
    total.min(1.0)
}

/// Largest per-run failure probability under which the median of `t`
/// independent runs fails with probability at most `beta`. For `t = 1`
/// this is `beta` itself.
pub fn per_run_failure(t: u32, beta: f64) -> f64 {
    if t == 1 {
        return beta;
    }
    let j0 = t / 2 + 1;
    let feasible = |p: f64| binomial_tail(t, p, j0) <= beta;
    let mut lo = 1e-9;
    let mut hi = 0.4999;
    if feasible(hi) {
        return hi;
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

fn validate_beta(beta: f64) -> Result<()> {
    if !beta.is_finite() || beta <= 0.0 || beta >= 0.5 {
        return Err(Error::InvalidParameter(format!(
            "failure probability beta must be in (0, 1/2), got {beta}"
        )));
    }
    Ok(())
}

/// Privatizes `est` with failure probability `beta`: the result deviates
/// from the exact target by more than the declared error scale only with
/// probability about `beta`.
///
/// For `MomentBound` estimators the budget is split over
/// [`boost_runs`]`(beta)` runs whose per-run accuracy is solved so that each
/// run stays within `est.error_scale(input, rho)` except with the exact
/// binomial per-run failure budget; the median of the runs then meets
/// `beta`. The contract is `P[|value - target| > error_scale(input, rho)]
/// <= beta` whenever the solve succeeds.
///
/// For `Subexponential` estimators a single run is executed at the tighter
/// accuracy `epsilon * rho / max(1, ln(1/beta))`, which buys the noise and
/// estimation tails down together; the deviation then stays within a small
/// constant multiple of `error_scale(input, rho)` with probability
/// `1 - beta`. Callers that need a hard constant should consult the
/// corollary wrappers, which report theirs.
pub fn boost_confidence<E: ApproxEstimator>(
    est: &E,
    input: &E::Input,
    rho: f64,
    budget: &PrivacyBudget,
    beta: f64,
    rng: &mut RandomSource,
) -> Result<PrivateEstimate> {
    validate_rho(rho)?;
    validate_beta(beta)?;
    let delta1 = est.sensitivity();
    let target = est.error_scale(input, rho);
    validate_scale_decl(delta1, target)?;
    let eps = budget.epsilon();
    if delta1 > eps * target {
        return Err(Error::RegimeViolation(format!(
            "sensitivity {delta1} exceeds epsilon * error_scale = {}; \
             no accuracy schedule can meet the target",
            eps * target
        )));
    }
    match est.kind() {
        ErrorKind::Subexponential => {
            let denom = (1.0f64).max((1.0 / beta).ln());
            let rho_run = (eps * rho / denom).min(rho);
            privatize_once(est, input, rho_run, budget, true, rng)
        }
        ErrorKind::MomentBound { alpha } => {
            let c_alpha = zspareto_c(alpha)?;
            if target <= 0.0 {
                return Err(Error::InvalidParameter(
                    "confidence boosting needs a positive error scale".into(),
                ));
            }
            let t = boost_runs(beta);
            let run_budget = budget.split(t);
            let eps_run = run_budget.epsilon();
            let p_run = per_run_failure(t, beta);
            // Per-run failure budget split evenly between the estimator's
            // own tail (Markov at order alpha) and the Pareto noise tail.
            let inv = 2.0 / p_run;
            let markov = inv.powf(1.0 / alpha);
            let noise_fac = inv.powf(1.0 / (alpha - 1.0)) - 1.0;
            // Solve markov * rho_run * f + noise_fac * c * (delta1 + rho_run * f)
            // / eps_run <= target for rho_run, with f = target / rho.
            let f = target / rho;
            let numer = target - noise_fac * c_alpha * delta1 / eps_run;
            if numer <= 0.0 {
                return Err(Error::RegimeViolation(format!(
                    "sensitivity noise alone ({} at epsilon {eps_run}) exceeds the \
                     error target {target}; request a coarser rho or larger beta",
                    noise_fac * c_alpha * delta1 / eps_run
                )));
            }
            let rho_run = (numer / (f * (markov + noise_fac * c_alpha / eps_run))).min(rho);
            let mut values = Vec::with_capacity(t as usize);
            let mut mechanism = None;
            for _ in 0..t {
                let one = privatize_once(est, input, rho_run, &run_budget, true, rng)?;
                values.push(one.value);
                mechanism.get_or_insert(one.mechanism);
            }
            Ok(PrivateEstimate {
                value: median_in_place(&mut values),
                mechanism: mechanism.expect("at least one run"),
                epsilon_spent: eps,
                runs: t,
                rho_run,
            })
        }
    }
}

/// Queryable state produced by a session builder: answers one query
/// exactly, without noise. The session owns the noise.
pub type Queryable<T> = Box<dyn FnMut(&T) -> f64>;

/// A fixed-budget adaptive query session.
///
/// Opened by [`open_session`] around a hidden data structure (typically a
/// sketch). Answers up to `k_max` adaptively chosen queries, adding a fresh
/// Laplace draw calibrated for the whole session to each answer. Once the
/// budget is spent, further queries are refused; the refusal consults only
/// the query counter, never the query itself, so refusals leak nothing.
///
/// The hidden randomness (sketch state) is never released, which is what
/// makes the per-session calibration sound for adaptively chosen queries.
pub struct QuerySession<T: ?Sized> {
    queryable: Queryable<T>,
    mechanism: MechanismSpec,
    k_max: u32,
    made: u32,
    rng: RandomSource,
}

impl<T: ?Sized> QuerySession<T> {
    /// Answers one query, consuming one unit of the session budget.
    pub fn query(&mut self, q: &T) -> Result<f64> {
        // Budget first: the refusal must not depend on query content.
        if self.made >= self.k_max {
            return Err(Error::QueryBudgetExhausted {
                made: self.made,
                k_max: self.k_max,
            });
        }
        self.made += 1;
        let raw = (self.queryable)(q);
        Ok(raw + sample_laplace(self.mechanism.scale(), &mut self.rng))
    }

    pub fn queries_made(&self) -> u32 {
        self.made
    }

    pub fn k_max(&self) -> u32 {
        self.k_max
    }

    /// Total budget the session consumes regardless of how many of its
    /// queries are actually asked.
    pub fn epsilon_spent(&self) -> f64 {
        match &self.mechanism {
            MechanismSpec::Laplace { epsilon, .. } => *epsilon,
            MechanismSpec::ZsPareto { epsilon, .. } => *epsilon,
        }
    }

    pub fn mechanism(&self) -> &MechanismSpec {
        &self.mechanism
    }
}

/// Opens an adaptive query session.
///
/// `build` constructs the hidden queryable state from a dedicated random
/// stream. `sens` declares the per-query sensitivity `delta1`, the
/// subexponential diameter `delta2` of the per-query answer error, and the
/// number of queries `k` the session will answer. The per-query noise scale
/// is `c * (delta1 + delta2) * k / epsilon` with the shared-state constant
/// `c = 3 + 12 ln 2` whenever `k > 1`.
pub fn open_session<T: ?Sized, B>(
    build: B,
    sens: &SensitivitySpec,
    budget: &PrivacyBudget,
    rng: &mut RandomSource,
) -> Result<QuerySession<T>>
where
    B: FnOnce(&mut RandomSource) -> Result<Queryable<T>>,
{
    sens.validate()?;
    let scale = laplace_scale(sens, budget)?;
    let mut sketch_rng = rng.fork();
    let noise_rng = rng.fork();
    let queryable = build(&mut sketch_rng)?;
    Ok(QuerySession {
        queryable,
        mechanism: MechanismSpec::Laplace {
            scale,
            c: laplace_c(sens.k),
            epsilon: budget.epsilon(),
            k: sens.k,
            delta1: sens.delta1,
            delta2: sens.delta2,
        },
        k_max: sens.k,
        made: 0,
        rng: noise_rng,
    })
}
