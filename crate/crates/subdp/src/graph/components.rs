//! Sublinear estimator for the number of connected components.
//!
//! Samples `ceil(4 / rho^2)` vertices; each contributes the reciprocal of
//! its component size, learned by exploring at most `ceil(2 / rho)`
//! vertices. Summed over a component, the reciprocals add to one, so `n`
//! times the sample mean estimates the component count with bias at most
//! `rho n / 2` from truncated components and variance at most
//! `rho^2 n^2 / 4`.
//!
//! The optional coin-doubling exploration replaces the fixed truncation by
//! geometric phases: after exploring `2^i` vertices the walk survives a
//! fair coin or reports zero, doubling its weight when it survives. The
//! per-sample value stays unbiased for every component smaller than the
//! cutoff while the expected exploration work drops to `O(log(1/rho))`.

use crate::error::Result;
use crate::graph::Graph;
use crate::noise::PrivacyBudget;
use crate::privatize::{
    boost_confidence, median_amplify, ApproxEstimator, ErrorKind, PrivateEstimate, MEDIAN5_FACTOR,
};
use crate::rng::RandomSource;

/// Component-count estimator.
#[derive(Clone, Copy, Debug, Default)]
pub struct CcEstimator {
    /// Use coin-doubling exploration instead of the fixed cutoff.
    pub doubling: bool,
}

/// Reusable exploration state so repeated samples avoid reallocation.
struct Explorer {
    stamp: Vec<u64>,
    generation: u64,
    stack: Vec<(u32, usize)>,
}

impl Explorer {
    fn new(n: usize) -> Self {
        Explorer {
            stamp: vec![0; n],
            generation: 0,
            stack: Vec::new(),
        }
    }

    fn begin(&mut self, v: u32) {
        self.generation += 1;
        self.stamp[v as usize] = self.generation;
        self.stack.clear();
        self.stack.push((v, 0));
    }

    /// Discovers one more vertex of the current component, or reports that
    /// it is exhausted.
    fn discover_one(&mut self, g: &Graph) -> bool {
        while let Some(&mut (u, ref mut next)) = self.stack.last_mut() {
            let nbrs = g.neighbors(u);
            let mut advanced = None;
            while *next < nbrs.len() {
                let w = nbrs[*next];
                *next += 1;
                if self.stamp[w as usize] != self.generation {
                    self.stamp[w as usize] = self.generation;
                    advanced = Some(w);
                    break;
                }
            }
            match advanced {
                Some(w) => {
                    self.stack.push((w, 0));
                    return true;
                }
                None => {
                    self.stack.pop();
                }
            }
        }
        false
    }

    /// Component size up to `cap`: stops as soon as `cap` vertices are
    /// known to exist.
    fn size_capped(&mut self, g: &Graph, v: u32, cap: u64) -> u64 {
        self.begin(v);
        let mut found = 1;
        while found < cap && self.discover_one(g) {
            found += 1;
        }
        found
    }

    /// Coin-doubling sample value: unbiased `1 / |C(v)|` for components no
    /// larger than the power-of-two cutoff, zero beyond it.
    fn doubling_value(&mut self, g: &Graph, v: u32, cap_pow: u64, rng: &mut RandomSource) -> f64 {
        self.begin(v);
        let mut found: u64 = 1;
        let mut target: u64 = 1;
        let mut weight = 1.0;
        loop {
            while found < target {
                if !self.discover_one(g) {
                    return weight / found as f64;
                }
                found += 1;
            }
            // Phase boundary: does the component extend past `target`?
            if !self.discover_one(g) {
                return weight / found as f64;
            }
            found += 1;
            if target >= cap_pow || !rng.coin() {
                return 0.0;
            }
            weight *= 2.0;
            target *= 2;
        }
    }
}

impl CcEstimator {
    fn sample_count(rho: f64) -> u64 {
        (4.0 / (rho * rho)).ceil() as u64
    }

    fn cutoff(rho: f64) -> u64 {
        (2.0 / rho).ceil() as u64
    }
}

impl ApproxEstimator for CcEstimator {
    type Input = Graph;

    fn evaluate(&self, g: &Graph, rho: f64, rng: &mut RandomSource) -> Result<f64> {
        if !(rho.is_finite() && rho > 0.0 && rho <= 1.0) {
            return Err(crate::error::Error::InvalidParameter(format!(
                "accuracy rho must be in (0, 1], got {rho}"
            )));
        }
        let n = g.n() as u64;
        if n == 0 {
            return Ok(0.0);
        }
        let s = Self::sample_count(rho);
        let cutoff = Self::cutoff(rho);
        let cap_pow = cutoff.next_power_of_two();
        let mut explorer = Explorer::new(g.n());
        let mut sum = 0.0;
        for _ in 0..s {
            let v = rng.below(n) as u32;
            sum += if self.doubling {
                explorer.doubling_value(g, v, cap_pow, rng)
            } else {
                1.0 / explorer.size_capped(g, v, cutoff) as f64
            };
        }
        Ok(n as f64 * sum / s as f64)
    }

    /// Second-moment bound on the error: bias and sampling variance
    /// together stay within `rho * n`.
    fn error_scale(&self, g: &Graph, rho: f64) -> f64 {
        rho * g.n() as f64
    }

    fn kind(&self) -> ErrorKind {
        ErrorKind::MomentBound { alpha: 2.0 }
    }

    /// Adding or removing one edge changes the component count by one.
    fn sensitivity(&self) -> f64 {
        1.0
    }
}

/// Convenience single run of the default estimator.
pub fn cc_estimate(g: &Graph, rho: f64, rng: &mut RandomSource) -> Result<f64> {
    CcEstimator::default().evaluate(g, rho, rng)
}

/// Differentially private connected-component count under edge neighbors:
/// `P[|value - c| > rho * n] <= beta`, spending exactly `epsilon`.
pub fn private_cc(
    g: &Graph,
    rho: f64,
    budget: &PrivacyBudget,
    beta: f64,
    rng: &mut RandomSource,
) -> Result<PrivateEstimate> {
    let est = median_amplify(CcEstimator::default())?;
    // The amplified scale is MEDIAN5_FACTOR * rho' * n; request the rho'
    // that makes the boosted target exactly rho * n.
    let rho_amp = rho / MEDIAN5_FACTOR;
    boost_confidence(&est, g, rho_amp, budget, beta, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::connected_components;

    fn rng(stream: u64) -> RandomSource {
        RandomSource::new(0x5eed_0005, stream)
    }

    /// Deterministic pseudo-random graph on `n` vertices.
    fn gnp(n: usize, p: f64, stream: u64) -> Graph {
        let mut r = rng(stream);
        let mut edges = Vec::new();
        for u in 0..n as u32 {
            for v in (u + 1)..n as u32 {
                if r.open01() < p {
                    edges.push((u, v));
                }
            }
        }
        Graph::from_edges(n, &edges).unwrap()
    }

    fn triangles_plus_isolated(triangles: usize, isolated: usize) -> Graph {
        let mut edges = Vec::new();
        for t in 0..triangles as u32 {
            let b = 3 * t;
            edges.extend([(b, b + 1), (b + 1, b + 2), (b, b + 2)]);
        }
        Graph::from_edges(3 * triangles + isolated, &edges).unwrap()
    }

    #[test]
    fn exact_on_small_components_when_cutoff_is_large() {
        // Components of size <= 3 and cutoff 2/rho = 20: no truncation, so
        // the only error is sampling noise.
        let g = triangles_plus_isolated(10, 5);
        let truth = 15.0;
        let mut r = rng(1);
        let mut sum = 0.0;
        let trials = 300;
        for _ in 0..trials {
            sum += cc_estimate(&g, 0.1, &mut r).unwrap();
        }
        let mean = sum / trials as f64;
        assert!((mean - truth).abs() < 0.2, "mean {mean}");
    }

    #[test]
    fn meets_error_bound_on_random_graph() {
        let g = gnp(500, 0.01, 2);
        let truth = connected_components(&g) as f64;
        let rho = 0.2;
        let mut r = rng(3);
        let mut within = 0;
        let trials = 300;
        for _ in 0..trials {
            let est = cc_estimate(&g, rho, &mut r).unwrap();
            if (est - truth).abs() <= rho * 500.0 {
                within += 1;
            }
        }
        assert!(
            within as f64 / trials as f64 >= 2.0 / 3.0,
            "within {within}/{trials}"
        );
    }

    #[test]
    fn doubling_variant_is_unbiased_and_bounded() {
        let g = triangles_plus_isolated(60, 120);
        let truth = 180.0;
        let rho = 0.25;
        let est = CcEstimator { doubling: true };
        let mut r = rng(4);
        let trials = 1500;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..trials {
            let e = est.evaluate(&g, rho, &mut r).unwrap();
            sum += e;
            sumsq += e * e;
        }
        let n = g.n() as f64;
        let mean = sum / trials as f64;
        let se = ((sumsq / trials as f64 - mean * mean) / trials as f64).sqrt();
        assert!((mean - truth).abs() <= 4.0 * se + 1e-9, "mean {mean} se {se}");
        // Mean squared error within the declared (rho n)^2.
        let mse = sumsq / trials as f64 - 2.0 * truth * mean + truth * truth;
        assert!(mse <= (rho * n).powi(2), "mse {mse}");
    }

    #[test]
    fn both_variants_agree_on_a_path() {
        // One long path: every sample truncates, and both estimators see
        // component sizes at least the cutoff, so estimates concentrate
        // near zero (far below rho * n from the truth of 1, as declared).
        let n = 400;
        let edges: Vec<(u32, u32)> = (0..n as u32 - 1).map(|i| (i, i + 1)).collect();
        let g = Graph::from_edges(n, &edges).unwrap();
        let rho = 0.2;
        let mut r = rng(5);
        let plain = cc_estimate(&g, rho, &mut r).unwrap();
        let doubling = CcEstimator { doubling: true }
            .evaluate(&g, rho, &mut r)
            .unwrap();
        assert!(plain.abs() <= rho * n as f64, "plain {plain}");
        assert!(doubling.abs() <= rho * n as f64, "doubling {doubling}");
    }

    #[test]
    fn private_cc_meets_target_on_known_graph() {
        let g = triangles_plus_isolated(100, 100);
        let truth = 200.0;
        let n = g.n() as f64;
        let rho = 0.2;
        let budget = PrivacyBudget::new(1.0).unwrap();
        let mut r = rng(6);
        let mut within = 0;
        let trials = 120;
        for _ in 0..trials {
            let got = private_cc(&g, rho, &budget, 1.0 / 3.0, &mut r).unwrap();
            assert_eq!(got.runs, 3);
            assert_eq!(got.epsilon_spent, 1.0);
            if (got.value - truth).abs() <= rho * n {
                within += 1;
            }
        }
        assert!(
            within as f64 / trials as f64 >= 2.0 / 3.0,
            "within {within}/{trials}"
        );
    }

    #[test]
    fn empty_graph_estimates_zero() {
        let g = Graph::from_edges(0, &[]).unwrap();
        let mut r = rng(7);
        assert_eq!(cc_estimate(&g, 0.5, &mut r).unwrap(), 0.0);
    }

    #[test]
    fn rejects_bad_rho() {
        let g = triangles_plus_isolated(2, 0);
        let mut r = rng(8);
        assert!(cc_estimate(&g, 0.0, &mut r).is_err());
        assert!(cc_estimate(&g, 2.0, &mut r).is_err());
    }
}
