//! Mergeable stream sketches and their private wrappers.

pub mod ams;
pub mod kll;

pub use ams::{private_f2, AmsSketch, F2Estimator};
pub use kll::{private_rank_session, KllSketch, KLL_RANK_DIAMETER_FACTOR};

/// One turnstile stream update: `x[index] += delta`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StreamUpdate {
    pub index: u64,
    pub delta: f64,
}
