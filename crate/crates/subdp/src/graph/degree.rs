//! Average-degree estimation under advice and the private geometric
//! search that removes the advice.
//!
//! The advice framework: an estimator `A(x, y, rho)` whose mean never
//! exceeds the target `g(x)` and whose mean absolute deviation from the
//! target is at most `rho * y` for any declared scale `y`. A halving walk
//! over `y`, each probe privatized with heavy-tailed noise, locates the
//! scale of `g(x)`; one accurate evaluation there produces the answer.
//! Budgets compose exactly: at most `Lc = ceil(log2(upper/lower))` probes
//! at `epsilon / (2 Lc)` each, plus a final phase at `epsilon / 2`.

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::noise::{sample_zspareto, zspareto_c, PrivacyBudget, MAX_EPSILON};
use crate::privatize::{
    boost_runs, median_in_place, MechanismSpec, PrivateEstimate, MEDIAN5_FACTOR,
};
use crate::rng::RandomSource;

/// Estimator that consumes a scale advice.
///
/// Contract for implementors, for every input `x`, advice `y > 0`, and
/// accuracy `rho > 0` (values above 1 are meaningful; the absolute
/// accuracy target is `rho * y`):
/// - the mean of `evaluate(x, y, rho)` is at most the target `g(x)`;
/// - the mean absolute deviation from `g(x)` is at most `rho * y`.
pub trait AdviceEstimator {
    type Input: ?Sized;

    fn evaluate(
        &self,
        x: &Self::Input,
        y: f64,
        rho: f64,
        rng: &mut RandomSource,
    ) -> Result<f64>;
}

/// Samples per evaluation beyond which [`DegreeEstimator`] fails loudly
/// rather than stall.
pub const MAX_DEGREE_SAMPLES: f64 = 2e8;

/// Average-degree advice estimator by ordered degree comparison.
///
/// A draw picks a uniform vertex `u` and a uniform neighbor `v` and
/// scores `2 deg(u)` when `(deg(u), u)` precedes `(deg(v), v)`. Every
/// edge is scored from exactly one endpoint, so a draw is an unbiased
/// estimate of the average degree with second moment at most
/// `(4/n) * sum of squared degrees`. The sample count makes the mean's
/// standard deviation at most `rho * y`.
#[derive(Clone, Copy, Debug, Default)]
pub struct DegreeEstimator;

impl AdviceEstimator for DegreeEstimator {
    type Input = Graph;

    fn evaluate(&self, g: &Graph, y: f64, rho: f64, rng: &mut RandomSource) -> Result<f64> {
        if !(y.is_finite() && y > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "advice must be positive and finite, got {y}"
            )));
        }
        if !(rho.is_finite() && rho > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "advice accuracy must be positive and finite, got {rho}"
            )));
        }
        let n = g.n();
        if n == 0 {
            return Ok(0.0);
        }
        let sigma2 = 4.0 * g.degree_square_sum() / n as f64;
        let target = rho * y;
        let wanted = (sigma2 / (target * target)).ceil();
        if !(wanted <= MAX_DEGREE_SAMPLES) {
            return Err(Error::Estimator(format!(
                "degree estimator would need {wanted:.3e} samples, over the cap of {MAX_DEGREE_SAMPLES:.0e}"
            )));
        }
        let r = (wanted as usize).max(1);
        let mut sum = 0.0;
        for _ in 0..r {
            let u = rng.below(n as u64) as u32;
            let d = g.degree(u);
            if d == 0 {
                continue;
            }
            let v = g.neighbors(u)[rng.below(d as u64) as usize];
            if (d, u) < (g.degree(v), v) {
                sum += 2.0 * d as f64;
            }
        }
        Ok(sum / r as f64)
    }
}

/// Configuration of [`advice_removal_search`].
#[derive(Clone, Copy, Debug)]
pub struct AdviceSearchConfig {
    /// Upper bound on the target over all inputs.
    pub upper: f64,
    /// Search floor; the walk never probes below it.
    pub lower: f64,
    /// Total privacy budget of the search.
    pub epsilon: f64,
    /// Relative accuracy driver of the final phase.
    pub rho: f64,
    /// Global sensitivity of the target under the neighbor relation.
    pub delta1: f64,
    /// Complexity exponents of the underlying estimator: evaluation cost
    /// scales between `(y'/y)^c1` and `(y'/y)^c2` when the advice shrinks
    /// from `y'` to `y`. Only `c2` enters the probe constants.
    pub c1: f64,
    pub c2: f64,
    /// Floor on the absolute accuracy any phase requests, trading
    /// accuracy for evaluation cost. The noise grows to match, so privacy
    /// is unaffected. `None` keeps the exact schedule.
    pub accuracy_floor: Option<f64>,
}

impl AdviceSearchConfig {
    /// Config with the default exponents `c1 = c2 = 1/2` and no accuracy
    /// floor.
    pub fn new(upper: f64, lower: f64, epsilon: f64, rho: f64, delta1: f64) -> Result<Self> {
        let cfg = AdviceSearchConfig {
            upper,
            lower,
            epsilon,
            rho,
            delta1,
            c1: 0.5,
            c2: 0.5,
            accuracy_floor: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lower.is_finite() && self.lower > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "search floor must be positive and finite, got {}",
                self.lower
            )));
        }
        if !(self.upper.is_finite() && self.upper >= self.lower) {
            return Err(Error::InvalidParameter(format!(
                "search upper bound must be finite and at least the floor, got {}",
                self.upper
            )));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0 && self.epsilon <= MAX_EPSILON) {
            return Err(Error::InvalidParameter(format!(
                "search epsilon must be in (0, {MAX_EPSILON}], got {}",
                self.epsilon
            )));
        }
        if !(self.rho.is_finite() && self.rho > 0.0 && self.rho <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "search rho must be in (0, 1], got {}",
                self.rho
            )));
        }
        if !(self.delta1.is_finite() && self.delta1 >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sensitivity must be finite and nonnegative, got {}",
                self.delta1
            )));
        }
        if !(self.c1.is_finite() && self.c1 > 0.0 && self.c2.is_finite() && self.c2 > 0.0) {
            return Err(Error::InvalidParameter(
                "complexity exponents must be positive and finite".to_string(),
            ));
        }
        if let Some(floor) = self.accuracy_floor {
            if !(floor.is_finite() && floor > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "accuracy floor must be positive and finite, got {floor}"
                )));
            }
        }
        Ok(())
    }
}

/// Result of one advice-removal search.
#[derive(Clone, Copy, Debug)]
pub struct SearchOutcome {
    pub value: f64,
    /// Probes executed before the final phase.
    pub iterations: u32,
    /// Advice at loop exit; the floor when no probe triggered.
    pub stopped_at: f64,
    pub stopped_at_floor: bool,
    /// Absolute accuracy the final evaluation ran at.
    pub final_accuracy: f64,
    /// Noise scale of the final release.
    pub noise_scale: f64,
    /// Budget consumed; equals the configured epsilon when the loop ran
    /// to the floor.
    pub epsilon_spent: f64,
}

/// Absolute accuracy and noise scale for one phase.
///
/// The pinned noise `b_spec` leaves slack over what the privacy rule
/// needs at the pinned accuracy `a_spec`; evaluating coarser, up to the
/// accuracy that exactly consumes the slack, cuts sample cost without
/// changing the released noise. The sensitivity term and the optional
/// accuracy floor can push the noise above `b_spec`, never below.
fn phase_params(
    a_spec: f64,
    b_spec: f64,
    eps_phase: f64,
    delta1: f64,
    floor: Option<f64>,
    c3: f64,
) -> (f64, f64) {
    let slack = (b_spec * eps_phase / c3 - delta1) / MEDIAN5_FACTOR;
    let acc = a_spec.max(slack).max(floor.unwrap_or(0.0));
    let noise = b_spec.max(c3 * (delta1 + MEDIAN5_FACTOR * acc) / eps_phase);
    (acc, noise)
}

/// Median of five evaluations at advice `y` plus heavy-tailed noise.
fn probe<A: AdviceEstimator + ?Sized>(
    est: &A,
    x: &A::Input,
    y: f64,
    acc: f64,
    noise: f64,
    rng: &mut RandomSource,
) -> Result<f64> {
    let mut vals = [0.0; 5];
    for slot in vals.iter_mut() {
        *slot = est.evaluate(x, y, acc / y, rng)?;
    }
    Ok(median_in_place(&mut vals) + sample_zspareto(3.0, noise, rng))
}

/// Private geometric search removing the advice requirement.
///
/// Walks the advice down from `upper` by halving. Each probe medians five
/// evaluations and adds ZSPareto noise at the pinned scale
/// `y / (3 * 3^c2)`, raised when the privacy rule demands more; the walk
/// stops at the first probe value at or above its advice, or at the floor.
/// The final phase evaluates at advice `stopped / 160` with accuracy
/// driver `rho * epsilon` and noise `rho * stopped`. The whole search is
/// `epsilon`-differentially private by composition; the returned value is
/// within a small multiple of `rho * g(x)` of the target with probability
/// at least 2/3.
pub fn advice_removal_search<A: AdviceEstimator + ?Sized>(
    est: &A,
    x: &A::Input,
    cfg: &AdviceSearchConfig,
    rng: &mut RandomSource,
) -> Result<SearchOutcome> {
    cfg.validate()?;
    let c3 = zspareto_c(3.0)?;
    let pow3 = 3.0f64.powf(cfg.c2);
    let lc = ((cfg.upper / cfg.lower).log2().ceil() as u32).max(1);
    let eps_iter = cfg.epsilon / (2.0 * lc as f64);
    let rho_iter = cfg.epsilon / (330.0 * pow3 * lc as f64);

    let mut ytilde = cfg.upper;
    let mut iterations = 0u32;
    let mut triggered = false;
    for _ in 0..lc {
        iterations += 1;
        let (acc, noise) = phase_params(
            rho_iter * ytilde,
            ytilde / (3.0 * pow3),
            eps_iter,
            cfg.delta1,
            cfg.accuracy_floor,
            c3,
        );
        if probe(est, x, ytilde, acc, noise, rng)? >= ytilde {
            triggered = true;
            break;
        }
        ytilde /= 2.0;
    }
    if !triggered {
        ytilde = cfg.lower;
    }

    let eps_fin = cfg.epsilon / 2.0;
    let y_fin = ytilde / 160.0;
    let (acc_fin, noise_fin) = phase_params(
        cfg.rho * cfg.epsilon * y_fin,
        cfg.rho * ytilde,
        eps_fin,
        cfg.delta1,
        cfg.accuracy_floor,
        c3,
    );
    let value = probe(est, x, y_fin, acc_fin, noise_fin, rng)?;
    Ok(SearchOutcome {
        value,
        iterations,
        stopped_at: ytilde,
        stopped_at_floor: !triggered,
        final_accuracy: acc_fin,
        noise_scale: noise_fin,
        epsilon_spent: iterations as f64 * eps_iter + eps_fin,
    })
}

/// Multiplier between the requested relative error of
/// [`private_avg_degree`] and the accuracy the internal search is asked
/// for. The search contract carries a constant near five; running it
/// eight times tighter leaves margin for the requested error.
pub const AVG_DEGREE_RHO_FACTOR: f64 = 8.0;

/// Accuracy-affecting options for [`private_avg_degree_opts`]. None of
/// them influence the privacy guarantee.
#[derive(Clone, Copy, Debug)]
pub struct AvgDegreeOptions {
    /// Declared lower bound on the edge count, setting the search floor
    /// `2 * min_edges / n`. An overdeclaration can only hurt accuracy.
    pub min_edges: usize,
    /// Overrides the regime check.
    pub force: bool,
    /// Forwarded to the search as its accuracy floor.
    pub accuracy_floor: Option<f64>,
}

impl Default for AvgDegreeOptions {
    fn default() -> Self {
        AvgDegreeOptions {
            min_edges: 1,
            force: false,
            accuracy_floor: None,
        }
    }
}

/// Edge-differentially private average degree with default options; see
/// [`private_avg_degree_opts`].
pub fn private_avg_degree(
    g: &Graph,
    rho: f64,
    budget: &PrivacyBudget,
    beta: f64,
    rng: &mut RandomSource,
) -> Result<PrivateEstimate> {
    private_avg_degree_opts(g, rho, budget, beta, &AvgDegreeOptions::default(), rng)
}

/// Edge-differentially private average degree via advice removal.
///
/// Runs the geometric search over [`DegreeEstimator`] at accuracy
/// `rho / AVG_DEGREE_RHO_FACTOR`; for `beta < 1/3` it medians
/// `boost_runs(beta)` independent searches on split budgets. In regimes
/// passing the check `delta1 <= epsilon * rho_search * floor` the output
/// is within relative error `rho` of the average degree with probability
/// at least `1 - beta`.
pub fn private_avg_degree_opts(
    g: &Graph,
    rho: f64,
    budget: &PrivacyBudget,
    beta: f64,
    opts: &AvgDegreeOptions,
    rng: &mut RandomSource,
) -> Result<PrivateEstimate> {
    if !(rho.is_finite() && rho > 0.0 && rho <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "accuracy rho must be in (0, 1], got {rho}"
        )));
    }
    if !(beta.is_finite() && beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "failure probability beta must be in (0, 1), got {beta}"
        )));
    }
    if g.n() == 0 || g.m() == 0 {
        return Err(Error::InvalidParameter(
            "average degree needs a graph with at least one edge".to_string(),
        ));
    }
    if opts.min_edges < 1 {
        return Err(Error::InvalidParameter(
            "declared minimum edge count must be at least one".to_string(),
        ));
    }
    let n = g.n() as f64;
    // One edge moves the degree sum by two.
    let delta1 = 2.0 / n;
    let upper = n - 1.0;
    let lower = 2.0 * opts.min_edges as f64 / n;
    if lower > upper {
        return Err(Error::InvalidParameter(format!(
            "declared minimum of {} edges exceeds what {} vertices admit as a search floor",
            opts.min_edges,
            g.n()
        )));
    }
    let rho_search = rho / AVG_DEGREE_RHO_FACTOR;
    let floor_accuracy = budget.epsilon() * rho_search * lower;
    if delta1 > floor_accuracy && !opts.force {
        return Err(Error::RegimeViolation(format!(
            "edge sensitivity {delta1:.3e} exceeds epsilon * rho * floor = \
             {floor_accuracy:.3e}; noise would dominate the answer"
        )));
    }

    let t = if beta >= 1.0 / 3.0 { 1 } else { boost_runs(beta) };
    let run_budget = budget.split(t);
    let est = DegreeEstimator;
    let mut values = Vec::with_capacity(t as usize);
    let mut spent = 0.0;
    let mut last = None;
    for _ in 0..t {
        let cfg = AdviceSearchConfig {
            upper,
            lower,
            epsilon: run_budget.epsilon(),
            rho: rho_search,
            delta1,
            c1: 0.5,
            c2: 0.5,
            accuracy_floor: opts.accuracy_floor,
        };
        let outcome = advice_removal_search(&est, g, &cfg, rng)?;
        spent += outcome.epsilon_spent;
        values.push(outcome.value);
        last = Some(outcome);
    }
    let value = median_in_place(&mut values);
    let outcome = last.expect("at least one search ran");
    Ok(PrivateEstimate {
        value,
        mechanism: MechanismSpec::ZsPareto {
            scale: outcome.noise_scale,
            c: zspareto_c(3.0)?,
            alpha: 3.0,
            epsilon: budget.epsilon(),
            delta1,
            delta2: MEDIAN5_FACTOR * outcome.final_accuracy,
        },
        epsilon_spent: spent,
        runs: t,
        rho_run: rho_search,
    })
}
