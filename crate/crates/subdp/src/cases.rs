//! Designated audit cases: one small neighbor pair per private estimator,
//! plus an unnoised control that must fail. The command line and the
//! acceptance checks share these definitions so they audit byte-identical
//! mechanisms.
//!
//! Every case runs its estimator at a single boosted run (`beta = 0.49`)
//! and full accuracy demand (`rho = 1`) so the added noise is as small,
//! and the audit as sharp, as the calibration allows on a small input.

use crate::audit::{
    adaptive_adversary_audit, audit_epsilon, AdaptiveStrategy, AuditConfig, AuditReport,
    NeighborRelation,
};
use crate::error::{Error, Result};
use crate::exact::connected_components;
use crate::graph::{
    private_avg_degree_opts, private_cc, private_matching, AvgDegreeOptions, Graph,
};
use crate::noise::PrivacyBudget;
use crate::privatize::{boost_confidence, median_amplify, MEDIAN5_FACTOR};
use crate::rng::RandomSource;
use crate::sketch::{private_rank_session, F2Estimator, StreamUpdate};

/// Case names accepted by [`run_audit_case`].
pub const AUDIT_CASE_NAMES: &[&str] =
    &["f2", "cc", "matching", "rank-adaptive", "avgdeg", "control"];

/// Confidence parameter shared by all cases: above 1/3, so estimators run
/// once instead of medianing boosted repetitions.
const CASE_BETA: f64 = 0.49;

fn k4() -> Graph {
    Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap()
}

/// Runs one named audit case at the given configuration.
///
/// The `control` case releases an exact, unnoised statistic on a pair with
/// different truths; its report must come back failed, which the caller
/// should treat as the expected outcome rather than an error.
pub fn run_audit_case(name: &str, cfg: &AuditConfig) -> Result<AuditReport> {
    let budget = PrivacyBudget::new(cfg.epsilon_target)?;
    match name {
        "f2" => {
            // Two turnstile streams differing in one update; their exact
            // second moments are 4 and 2, so the pair's sensitivity is 2.
            let a = [
                StreamUpdate { index: 0, delta: 1.0 },
                StreamUpdate { index: 0, delta: 1.0 },
            ];
            let b = [
                StreamUpdate { index: 0, delta: 1.0 },
                StreamUpdate { index: 1, delta: 1.0 },
            ];
            audit_epsilon(
                move |stream: &[StreamUpdate], rng: &mut RandomSource| {
                    let mut est = F2Estimator::new(4);
                    est.delta1 = 2.0;
                    let amplified = median_amplify(est)?;
                    let rho_amp = 2.0 / MEDIAN5_FACTOR;
                    Ok(
                        boost_confidence(&amplified, stream, rho_amp, &budget, CASE_BETA, rng)?
                            .value,
                    )
                },
                "private-f2",
                NeighborRelation::StreamUpdate,
                &a[..],
                &b[..],
                cfg,
            )
        }
        "cc" => {
            let a = Graph::from_edges(8, &[])?;
            let b = Graph::from_edges(8, &[(0, 1)])?;
            audit_epsilon(
                move |g: &Graph, rng: &mut RandomSource| {
                    Ok(private_cc(g, 1.0, &budget, CASE_BETA, rng)?.value)
                },
                "private-cc",
                NeighborRelation::Edge,
                &a,
                &b,
                cfg,
            )
        }
        "matching" => {
            // Node neighbors keep the vertex count public: the second
            // graph is the complete graph with one vertex isolated.
            let a = k4();
            let b = Graph::from_edges(4, &[(0, 1), (0, 2), (1, 2)])?;
            audit_epsilon(
                move |g: &Graph, rng: &mut RandomSource| {
                    Ok(private_matching(g, 1.0, &budget, CASE_BETA, rng)?.value)
                },
                "private-matching",
                NeighborRelation::Node,
                &a,
                &b,
                cfg,
            )
        }
        "rank-adaptive" => {
            // The second rank query jumps toward whichever half the first
            // noisy answer indicates, so the transcript is adaptive.
            struct Threshold;
            impl AdaptiveStrategy<f64> for Threshold {
                fn first(&self) -> f64 {
                    25.0
                }
                fn next(&self, previous_answer: f64) -> f64 {
                    if previous_answer > 25.0 {
                        37.0
                    } else {
                        12.0
                    }
                }
            }
            let a: Vec<f64> = (0..50).map(f64::from).collect();
            let mut b = a.clone();
            b[25] = 12.5;
            adaptive_adversary_audit(
                move |data: &[f64], rng: &mut RandomSource| {
                    private_rank_session(data, 1.0, &budget, CASE_BETA, 2, rng)
                },
                &Threshold,
                "private-rank-session",
                NeighborRelation::Element,
                &a[..],
                &b[..],
                cfg,
            )
        }
        "avgdeg" => {
            // The complete four-vertex graph sits outside the estimator's
            // accuracy regime (the refusal is part of the contract), so
            // the audit forces the honestly calibrated noise and bounds
            // the per-trial sampling work with a public accuracy floor.
            let a = k4();
            let b = Graph::from_edges(4, &[(0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])?;
            audit_epsilon(
                move |g: &Graph, rng: &mut RandomSource| {
                    let opts = AvgDegreeOptions {
                        min_edges: 5,
                        force: true,
                        accuracy_floor: Some(0.15),
                    };
                    Ok(private_avg_degree_opts(g, 1.0, &budget, CASE_BETA, &opts, rng)?.value)
                },
                "private-avg-degree",
                NeighborRelation::Edge,
                &a,
                &b,
                cfg,
            )
        }
        "control" => {
            let a = Graph::from_edges(8, &[])?;
            let b = Graph::from_edges(8, &[(0, 1)])?;
            audit_epsilon(
                |g: &Graph, _rng: &mut RandomSource| Ok(connected_components(g) as f64),
                "unnoised-control",
                NeighborRelation::Edge,
                &a,
                &b,
                cfg,
            )
        }
        other => Err(Error::InvalidParameter(format!(
            "unknown audit case {other:?}; valid cases: {}",
            AUDIT_CASE_NAMES.join(", ")
        ))),
    }
}
