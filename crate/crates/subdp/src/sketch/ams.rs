//! Count-sketch estimator for the second frequency moment.
//!
//! Each row hashes indices into `ceil(8 / rho^2)` buckets with a 4-wise
//! independent bucket hash and adds `sign(index) * delta` to the bucket
//! counter. The sum of squared counters of a row is an unbiased estimate of
//! `F2 = sum x_i^2` with variance at most `2 F2^2 / cols <= (rho F2 / 2)^2`;
//! the sketch reports the median across rows. Sketches with identical hash
//! parameters merge by counter addition.

use crate::error::{Error, Result};
use crate::noise::PrivacyBudget;
use crate::privatize::{
    boost_confidence, median_amplify, median_in_place, ApproxEstimator, ErrorKind,
    PrivateEstimate, MEDIAN5_FACTOR,
};
use crate::rng::RandomSource;
use crate::sketch::StreamUpdate;

/// Mersenne prime modulus for the polynomial hash family.
const HASH_P: u64 = (1 << 61) - 1;

/// Largest number of counters one sketch may allocate.
const MAX_COUNTERS: usize = 1 << 31;

/// Degree-3 polynomial over the Mersenne field: a 4-wise independent hash.
#[derive(Clone, Debug, PartialEq)]
struct Poly4 {
    coeffs: [u64; 4],
}

impl Poly4 {
    fn random(rng: &mut RandomSource) -> Self {
        let mut coeffs = [0u64; 4];
        for c in coeffs.iter_mut() {
            *c = rng.below(HASH_P);
        }
        Poly4 { coeffs }
    }

    fn eval(&self, x: u64) -> u64 {
        let x = (x % HASH_P) as u128;
        let p = HASH_P as u128;
        let mut acc = 0u128;
        for &c in &self.coeffs {
            acc = (acc * x + c as u128) % p;
        }
        acc as u64
    }
}

/// Count-sketch accumulator for a turnstile stream.
#[derive(Clone, Debug)]
pub struct AmsSketch {
    universe: u64,
    rows: usize,
    cols: usize,
    counters: Vec<f64>,
    bucket: Vec<Poly4>,
    sign: Vec<Poly4>,
}

impl AmsSketch {
    /// Creates a sketch over indices `[0, universe)` targeting relative
    /// accuracy `rho` with `rows` independent rows (odd, for the median).
    pub fn new(universe: u64, rho: f64, rows: usize, rng: &mut RandomSource) -> Result<Self> {
        if universe == 0 {
            return Err(Error::InvalidParameter("universe must be positive".into()));
        }
        if !rho.is_finite() || rho <= 0.0 || rho > 1.0 {
            return Err(Error::InvalidParameter(format!(
                "accuracy rho must be in (0, 1], got {rho}"
            )));
        }
        if rows == 0 || rows % 2 == 0 {
            return Err(Error::InvalidParameter(format!(
                "row count must be odd and positive, got {rows}"
            )));
        }
        let cols = (8.0 / (rho * rho)).ceil() as usize;
        if cols.checked_mul(rows).is_none_or(|n| n > MAX_COUNTERS) {
            return Err(Error::InvalidParameter(format!(
                "sketch of {rows} x {cols} counters exceeds the size limit"
            )));
        }
        let bucket = (0..rows).map(|_| Poly4::random(rng)).collect();
        let sign = (0..rows).map(|_| Poly4::random(rng)).collect();
        Ok(AmsSketch {
            universe,
            rows,
            cols,
            counters: vec![0.0; rows * cols],
            bucket,
            sign,
        })
    }

    pub fn universe(&self) -> u64 {
        self.universe
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Applies one stream update.
    pub fn update(&mut self, u: &StreamUpdate) -> Result<()> {
        if u.index >= self.universe {
            return Err(Error::InvalidParameter(format!(
                "index {} outside universe of size {}",
                u.index, self.universe
            )));
        }
        if !u.delta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "update delta must be finite, got {}",
                u.delta
            )));
        }
        for r in 0..self.rows {
            let b = (self.bucket[r].eval(u.index) % self.cols as u64) as usize;
            let s = if self.sign[r].eval(u.index) & 1 == 1 {
                1.0
            } else {
                -1.0
            };
            self.counters[r * self.cols + b] += s * u.delta;
        }
        Ok(())
    }

    /// Per-row unbiased F2 estimates: the sum of squared counters.
    pub fn row_estimates(&self) -> Vec<f64> {
        (0..self.rows)
            .map(|r| {
                self.counters[r * self.cols..(r + 1) * self.cols]
                    .iter()
                    .map(|c| c * c)
                    .sum()
            })
            .collect()
    }

    /// Median of the per-row estimates.
    pub fn estimate_f2(&self) -> f64 {
        let mut rows = self.row_estimates();
        median_in_place(&mut rows)
    }

    /// Merges another sketch built with identical parameters (same
    /// universe, shape, and hash polynomials); the result sketches the
    /// concatenation of both streams.
    pub fn merge(&mut self, other: &AmsSketch) -> Result<()> {
        let compatible = self.universe == other.universe
            && self.rows == other.rows
            && self.cols == other.cols
            && self.bucket == other.bucket
            && self.sign == other.sign;
        if !compatible {
            return Err(Error::InvalidParameter(
                "sketches with different parameters cannot merge".into(),
            ));
        }
        for (a, b) in self.counters.iter_mut().zip(&other.counters) {
            *a += b;
        }
        Ok(())
    }
}

/// Single-row F2 estimator over a recorded update stream, in the form the
/// privatizer consumes.
///
/// `delta1` is the F2 sensitivity to one changed stream update; the default
/// of `universe` covers frequency vectors whose entries stay within unit
/// magnitude. Error scale is `rho * universe^2 / 2`, a second-moment bound
/// valid whenever the stream keeps `F2 <= universe^2`.
#[derive(Clone, Debug)]
pub struct F2Estimator {
    pub universe: u64,
    pub delta1: f64,
}

impl F2Estimator {
    pub fn new(universe: u64) -> Self {
        F2Estimator {
            universe,
            delta1: universe as f64,
        }
    }
}

impl ApproxEstimator for F2Estimator {
    type Input = [StreamUpdate];

    fn evaluate(&self, input: &[StreamUpdate], rho: f64, rng: &mut RandomSource) -> Result<f64> {
        let mut fork = rng.fork();
        let mut sketch = AmsSketch::new(self.universe, rho, 1, &mut fork)?;
        for u in input {
            sketch.update(u)?;
        }
        Ok(sketch.estimate_f2())
    }

    fn error_scale(&self, _input: &[StreamUpdate], rho: f64) -> f64 {
        let n = self.universe as f64;
        0.5 * rho * n * n
    }

    fn kind(&self) -> ErrorKind {
        ErrorKind::MomentBound { alpha: 2.0 }
    }

    fn sensitivity(&self) -> f64 {
        self.delta1
    }
}

/// Differentially private second frequency moment of a turnstile stream.
///
/// Medians five single-row sketches per run and boosts to failure
/// probability `beta`; the result satisfies
/// `P[|value - F2| > rho * universe^2] <= beta` under stream-update
/// neighbors, spending exactly `epsilon`.
pub fn private_f2(
    stream: &[StreamUpdate],
    universe: u64,
    rho: f64,
    budget: &PrivacyBudget,
    beta: f64,
    rng: &mut RandomSource,
) -> Result<PrivateEstimate> {
    let est = median_amplify(F2Estimator::new(universe))?;
    // The amplified scale is MEDIAN5_FACTOR * rho' * n^2 / 2; request the
    // rho' that makes the boosted target exactly rho * n^2.
    let rho_amp = 2.0 * rho / MEDIAN5_FACTOR;
    boost_confidence(&est, stream, rho_amp, budget, beta, rng)
}
