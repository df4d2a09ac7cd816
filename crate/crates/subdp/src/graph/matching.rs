//! Sublinear matching-size estimator built on a local computation oracle.
//!
//! Edges are ranked by a deterministic hash of an oracle seed; the greedy
//! maximal matching over increasing ranks is then a pointwise-computable
//! object: an edge belongs to it exactly when none of its lower-ranked
//! neighbors does. The estimator samples vertices, asks the oracle whether
//! each is matched, and scales the hit count. Exploration is memoized and
//! budgeted, so each query touches a small neighborhood with high
//! probability; the budget failing loudly is the trade for never scanning
//! the whole graph.
//!
//! The estimate targets the greedy matching of its seed, which is maximal
//! and therefore at least half a maximum matching. The declared error scale
//! covers the vertex-sampling noise around that greedy target; on graphs
//! whose maximal matchings are all maximum (the calibration and audit
//! inputs here) it covers the distance to the true maximum as well.

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::noise::{laplace_c, PrivacyBudget};
use crate::privatize::{boost_confidence, ApproxEstimator, ErrorKind, PrivateEstimate};
use crate::rng::{splitmix64, RandomSource};

use std::collections::HashMap;

type EdgeKey = u64;

fn edge_key(u: u32, v: u32) -> EdgeKey {
    ((u.min(v) as u64) << 32) | u.max(v) as u64
}

fn key_ends(key: EdgeKey) -> (u32, u32) {
    ((key >> 32) as u32, key as u32)
}

/// Local oracle for membership in the greedy matching of a rank seed.
pub struct MatchingOracle<'g> {
    g: &'g Graph,
    seed: u64,
    memo: HashMap<EdgeKey, bool>,
    resolved: usize,
    cap: usize,
}

struct Frame {
    key: EdgeKey,
    deps: Vec<EdgeKey>,
    idx: usize,
}

impl<'g> MatchingOracle<'g> {
    /// `cap` bounds the total number of distinct edges the oracle may
    /// resolve over its lifetime; exceeding it is an error.
    pub fn new(g: &'g Graph, seed: u64, cap: usize) -> Self {
        MatchingOracle {
            g,
            seed,
            memo: HashMap::new(),
            resolved: 0,
            cap,
        }
    }

    /// Edges resolved so far, for cost reporting.
    pub fn resolved(&self) -> usize {
        self.resolved
    }

    fn rank(&self, key: EdgeKey) -> (u64, EdgeKey) {
        (splitmix64(self.seed ^ splitmix64(key)), key)
    }

    fn new_frame(&mut self, key: EdgeKey) -> Result<Frame> {
        self.resolved += 1;
        if self.resolved > self.cap {
            return Err(Error::Estimator(format!(
                "matching oracle exceeded its exploration budget of {} edges",
                self.cap
            )));
        }
        let my_rank = self.rank(key);
        let (u, v) = key_ends(key);
        let mut deps: Vec<(u64, EdgeKey)> = Vec::new();
        for (a, b) in [(u, v), (v, u)] {
            for &w in self.g.neighbors(a) {
                if w == b {
                    continue;
                }
                let k = edge_key(a, w);
                let r = self.rank(k);
                if r < my_rank {
                    deps.push(r);
                }
            }
        }
        deps.sort_unstable();
        Ok(Frame {
            key,
            deps: deps.into_iter().map(|(_, k)| k).collect(),
            idx: 0,
        })
    }

    /// Whether the edge `(u, v)` belongs to the greedy matching.
    pub fn edge_in_matching(&mut self, u: u32, v: u32) -> Result<bool> {
        let key0 = edge_key(u, v);
        if let Some(&hit) = self.memo.get(&key0) {
            return Ok(hit);
        }
        let mut stack = vec![self.new_frame(key0)?];
        while let Some(top) = stack.last() {
            let pending = top.deps.get(top.idx).copied();
            match pending {
                // All lower-ranked neighbors are out, so this edge is in.
                None => {
                    self.memo.insert(top.key, true);
                    stack.pop();
                }
                Some(dep) => match self.memo.get(&dep) {
                    // A lower-ranked neighbor is matched; this edge is out.
                    Some(&true) => {
                        self.memo.insert(top.key, false);
                        stack.pop();
                    }
                    Some(&false) => {
                        stack.last_mut().expect("nonempty").idx += 1;
                    }
                    None => {
                        let frame = self.new_frame(dep)?;
                        stack.push(frame);
                    }
                },
            }
        }
        Ok(self.memo[&key0])
    }

    /// Whether vertex `v` is covered by the greedy matching.
    pub fn vertex_is_matched(&mut self, v: u32) -> Result<bool> {
        let mut incident: Vec<((u64, EdgeKey), u32)> = self
            .g
            .neighbors(v)
            .iter()
            .map(|&w| (self.rank(edge_key(v, w)), w))
            .collect();
        incident.sort_unstable();
        for (_, w) in incident {
            if self.edge_in_matching(v, w)? {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

/// Matching-size estimator.
#[derive(Clone, Copy, Debug)]
pub struct MatchingEstimator {
    /// Exploration budget per evaluation; exceeded budgets fail loudly.
    pub exploration_cap: usize,
}

impl Default for MatchingEstimator {
    fn default() -> Self {
        MatchingEstimator {
            exploration_cap: 1_000_000,
        }
    }
}

impl ApproxEstimator for MatchingEstimator {
    type Input = Graph;

    fn evaluate(&self, g: &Graph, rho: f64, rng: &mut RandomSource) -> Result<f64> {
        if !(rho.is_finite() && rho > 0.0 && rho <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "accuracy rho must be in (0, 1], got {rho}"
            )));
        }
        let n = g.n() as u64;
        if n == 0 {
            return Ok(0.0);
        }
        let seed = rng.next_u64();
        let mut oracle = MatchingOracle::new(g, seed, self.exploration_cap);
        let s = (2.0 / (rho * rho)).ceil() as u64;
        let mut hits = 0u64;
        for _ in 0..s {
            let v = rng.below(n) as u32;
            if oracle.vertex_is_matched(v)? {
                hits += 1;
            }
        }
        Ok(g.n() as f64 * hits as f64 / (2.0 * s as f64))
    }

    /// Subexponential diameter of the sampling error: with `2 / rho^2`
    /// samples the Hoeffding tail gives a diameter below
    /// `rho n / (4 sqrt(ln 2))`, inside the declared `rho n / 2`.
    fn error_scale(&self, g: &Graph, rho: f64) -> f64 {
        0.5 * rho * g.n() as f64
    }

    fn kind(&self) -> ErrorKind {
        ErrorKind::Subexponential
    }

    /// Removing or adding one vertex changes the matching size by at most
    /// one.
    fn sensitivity(&self) -> f64 {
        1.0
    }
}

/// Convenience single run of the default estimator.
pub fn matching_estimate(g: &Graph, rho: f64, rng: &mut RandomSource) -> Result<f64> {
    MatchingEstimator::default().evaluate(g, rho, rng)
}

/// Differentially private matching size under node neighbors.
///
/// The deviation from the matching size stays within
/// [`matching_coverage_bound`] times `rho * n` with probability `1 - beta`.
pub fn private_matching(
    g: &Graph,
    rho: f64,
    budget: &PrivacyBudget,
    beta: f64,
    rng: &mut RandomSource,
) -> Result<PrivateEstimate> {
    boost_confidence(&MatchingEstimator::default(), g, rho, budget, beta, rng)
}

/// Proven coverage constant of [`private_matching`]: with probability at
/// least `1 - beta` the private estimate is within `C * rho * n` of the
/// greedy matching size, where `C` is the value returned here. Derived
/// from the boosted run accuracy `rho' = epsilon * rho / max(1, ln(1/beta))`
/// by splitting `beta` between the sampling tail and the Laplace tail.
pub fn matching_coverage_bound(n: usize, rho: f64, epsilon: f64, beta: f64) -> f64 {
    let rho_run = epsilon * rho / 1.0f64.max((1.0 / beta).ln());
    let diam = 0.5 * rho_run * n as f64;
    let b = laplace_c(1) * (1.0 + diam) / epsilon;
    let t1 = diam * (4.0 / beta).ln();
    let t2 = b * (2.0 / beta).ln();
    (t1 + t2) / (rho * n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::maximum_matching;

    fn rng(stream: u64) -> RandomSource {
        RandomSource::new(0x5eed_0007, stream)
    }

    fn path(n: usize) -> Graph {
        let edges: Vec<(u32, u32)> = (0..n as u32 - 1).map(|i| (i, i + 1)).collect();
        Graph::from_edges(n, &edges).unwrap()
    }

    fn disjoint_edges(pairs: usize, isolated: usize) -> Graph {
        let edges: Vec<(u32, u32)> = (0..pairs as u32).map(|i| (2 * i, 2 * i + 1)).collect();
        Graph::from_edges(2 * pairs + isolated, &edges).unwrap()
    }

    /// The oracle's answers must describe one object: a symmetric pairing
    /// that is a maximal matching, with the vertex view agreeing with the
    /// edge view and even total coverage.
    fn assert_oracle_invariants(g: &Graph, seed: u64) {
        let mut oracle = MatchingOracle::new(g, seed, 1 << 20);
        let mut partner = vec![u32::MAX; g.n()];
        for (u, v) in g.edge_list() {
            let hit = oracle.edge_in_matching(u, v).unwrap();
            assert_eq!(hit, oracle.edge_in_matching(v, u).unwrap());
            if hit {
                assert_eq!(partner[u as usize], u32::MAX, "vertex {u} matched twice");
                assert_eq!(partner[v as usize], u32::MAX, "vertex {v} matched twice");
                partner[u as usize] = v;
                partner[v as usize] = u;
            }
        }
        for (u, v) in g.edge_list() {
            assert!(
                partner[u as usize] != u32::MAX || partner[v as usize] != u32::MAX,
                "edge ({u}, {v}) violates maximality"
            );
        }
        let mut covered = 0usize;
        for v in 0..g.n() as u32 {
            let hit = oracle.vertex_is_matched(v).unwrap();
            assert_eq!(hit, partner[v as usize] != u32::MAX, "vertex {v}");
            covered += hit as usize;
        }
        assert_eq!(covered % 2, 0);
    }

    #[test]
    fn oracle_is_a_maximal_matching_on_every_small_graph() {
        for n in 2..=6usize {
            let mut pairs = Vec::new();
            for u in 0..n as u32 {
                for v in (u + 1)..n as u32 {
                    pairs.push((u, v));
                }
            }
            for mask in 0u64..1 << pairs.len() {
                let edges: Vec<(u32, u32)> = pairs
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, &e)| e)
                    .collect();
                let g = Graph::from_edges(n, &edges).unwrap();
                assert_oracle_invariants(&g, 0x0c00 ^ mask);
            }
        }
    }

    #[test]
    fn oracle_is_a_maximal_matching_on_random_graphs() {
        let mut r = rng(11);
        for trial in 0..200u64 {
            let n = 7 + (trial % 4) as usize;
            let p = [0.15, 0.3, 0.5, 0.8][(trial / 4 % 4) as usize];
            let mut edges = Vec::new();
            for u in 0..n as u32 {
                for v in (u + 1)..n as u32 {
                    if r.open01() < p {
                        edges.push((u, v));
                    }
                }
            }
            let g = Graph::from_edges(n, &edges).unwrap();
            assert_oracle_invariants(&g, trial);
        }
    }

    #[test]
    fn oracle_matches_global_greedy() {
        // Replay of the greedy process over sorted ranks must agree with
        // the local oracle on every edge.
        for stream in 0..10 {
            let g = {
                let mut r = rng(stream);
                let n = 30;
                let mut edges = Vec::new();
                for u in 0..n as u32 {
                    for v in (u + 1)..n as u32 {
                        if r.open01() < 0.15 {
                            edges.push((u, v));
                        }
                    }
                }
                Graph::from_edges(n, &edges).unwrap()
            };
            let seed = 0xfeed + stream;
            let mut oracle = MatchingOracle::new(&g, seed, 1_000_000);
            // Global greedy replay.
            let mut ranked: Vec<((u64, EdgeKey), (u32, u32))> = g
                .edge_list()
                .into_iter()
                .map(|(u, v)| (oracle.rank(edge_key(u, v)), (u, v)))
                .collect();
            ranked.sort_unstable();
            let mut covered = vec![false; g.n()];
            let mut greedy = std::collections::HashSet::new();
            for (_, (u, v)) in ranked {
                if !covered[u as usize] && !covered[v as usize] {
                    covered[u as usize] = true;
                    covered[v as usize] = true;
                    greedy.insert(edge_key(u, v));
                }
            }
            for (u, v) in g.edge_list() {
                assert_eq!(
                    oracle.edge_in_matching(u, v).unwrap(),
                    greedy.contains(&edge_key(u, v)),
                    "seed {seed} edge ({u},{v})"
                );
            }
            for v in 0..g.n() as u32 {
                assert_eq!(
                    oracle.vertex_is_matched(v).unwrap(),
                    covered[v as usize],
                    "seed {seed} vertex {v}"
                );
            }
        }
    }

    #[test]
    fn oracle_budget_fails_loudly() {
        let g = path(200);
        let mut oracle = MatchingOracle::new(&g, 7, 10);
        let mut saw_budget_error = false;
        for v in 0..200 {
            match oracle.vertex_is_matched(v) {
                Ok(_) => {}
                Err(Error::Estimator(msg)) => {
                    assert!(msg.contains("budget"));
                    saw_budget_error = true;
                    break;
                }
                Err(e) => panic!("unexpected error {e}"),
            }
        }
        assert!(saw_budget_error);
    }

    #[test]
    fn estimate_concentrates_on_disjoint_edges() {
        // Greedy equals maximum here, so the estimator targets the truth.
        let g = disjoint_edges(150, 100);
        let truth = 150.0;
        let rho = 0.1;
        let mut r = rng(1);
        let trials = 200;
        let mut within = 0;
        for _ in 0..trials {
            let est = matching_estimate(&g, rho, &mut r).unwrap();
            if (est - truth).abs() <= 0.5 * rho * g.n() as f64 {
                within += 1;
            }
        }
        assert!(within as f64 / trials as f64 > 0.85, "within {within}");
    }

    #[test]
    fn estimate_tracks_greedy_on_paths() {
        // Any maximal matching on a path of n vertices covers at least
        // n/3 edges; check the estimate lands in the maximal range.
        let g = path(300);
        let maximum = maximum_matching(&g) as f64;
        let mut r = rng(2);
        let mut sum = 0.0;
        let trials = 60;
        for _ in 0..trials {
            sum += matching_estimate(&g, 0.15, &mut r).unwrap();
        }
        let mean = sum / trials as f64;
        assert!(
            mean >= maximum / 2.0 - 10.0 && mean <= maximum + 10.0,
            "mean {mean} maximum {maximum}"
        );
    }

    #[test]
    fn private_matching_meets_reported_coverage() {
        let g = disjoint_edges(200, 100);
        let n = g.n();
        let truth = 200.0;
        let (rho, beta) = (0.1, 1.0 / 3.0);
        let budget = PrivacyBudget::new(1.0).unwrap();
        let c = matching_coverage_bound(n, rho, 1.0, beta);
        let mut r = rng(3);
        let trials = 200;
        let mut within = 0;
        for _ in 0..trials {
            let got = private_matching(&g, rho, &budget, beta, &mut r).unwrap();
            assert_eq!(got.runs, 1);
            if (got.value - truth).abs() <= c * rho * n as f64 {
                within += 1;
            }
        }
        let cover = within as f64 / trials as f64;
        assert!(cover >= 1.0 - beta, "coverage {cover} at C = {c:.2}");
    }

    #[test]
    fn empty_graph_estimates_zero() {
        let g = Graph::from_edges(0, &[]).unwrap();
        assert_eq!(matching_estimate(&g, 0.5, &mut rng(4)).unwrap(), 0.0);
    }
}
