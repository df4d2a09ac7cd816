//! Differential privacy for Monte-Carlo approximation algorithms.
//!
//! A randomized approximation algorithm already tolerates error in its own
//! output. This library exploits that tolerance: calibrating additive noise
//! to the estimator's declared error scale (rather than to the raw query
//! sensitivity) makes the result differentially private at only a constant
//! factor in accuracy. The privatization pipeline lives in [`privatize`];
//! the noise distributions and their calibration constants in [`noise`];
//! ready-made sublinear estimators in [`sketch`] (frequency moments, rank
//! queries) and [`graph`] (connected components, matching size, average
//! degree); empirical privacy audits in [`audit`]; and numerical verifiers
//! for the underlying inequalities in [`verify`].
//!
//! The `examples/` directory is the guided tour, one runnable program per
//! capability:
//!
//! * `mechanisms`: noise distributions and calibration constants.
//! * `privatize_basics`: privatizing a custom estimator end to end.
//! * `frequency_moment`: private F2 of a turnstile stream.
//! * `rank_queries`: adaptive rank queries with a hard query budget.
//! * `connected_components`: component counting on a sparse graph.
//! * `matching_size`: maximal matching size by local exploration.
//! * `average_degree`: advice-removal search with a public edge promise.
//! * `audit_epsilon`: histogram audit of designated estimator pairs.
//! * `verify_lemmas`: the numerical verifier suite.
//!
//! The `subdp` binary exposes the same operations as subcommands that read
//! files and emit reproducible JSON reports; see [`cli`] and [`io`] for the
//! grammar and file formats. Every random decision flows from one explicit
//! seed through [`rng::RandomSource`], so any report can be replayed.

pub mod audit;
pub mod cases;
pub mod cli;
pub mod error;
pub mod exact;
pub mod graph;
pub mod io;
pub mod noise;
pub mod privatize;
pub mod quad;
pub mod report;
pub mod rng;
pub mod sketch;
pub mod verify;

pub use error::{Error, Result};
pub use graph::Graph;
pub use noise::{PrivacyBudget, SensitivitySpec};
pub use privatize::{ApproxEstimator, ErrorKind, MechanismSpec, PrivateEstimate};
pub use rng::RandomSource;
