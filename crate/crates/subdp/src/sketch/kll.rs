//! KLL quantile sketch and the private rank-query session.
//!
//! The sketch keeps a hierarchy of levels; an item at level `l` represents
//! `2^l` input items. Level capacities decay geometrically (ratio 2/3) from
//! the newest level down, with a floor of two slots. A full level is
//! compacted: sorted, then every second item (random offset) is promoted to
//! the next level and the rest are dropped, so represented weight is
//! conserved exactly. Rank estimates are weighted counts over the stored
//! items.

use crate::error::{Error, Result};
use crate::noise::{PrivacyBudget, SensitivitySpec};
use crate::privatize::{open_session, QuerySession, Queryable};
use crate::rng::RandomSource;

/// Largest level-zero capacity a sketch may allocate.
const MAX_CAPACITY: usize = 1 << 26;

/// Declared subexponential diameter of the rank error, as a multiple of
/// `rho' * n`. Measured on uniform and adversarially ordered inputs, where
/// the fitted diameter stays below half of this; the factor of two is
/// headroom so the declaration remains an upper bound.
pub const KLL_RANK_DIAMETER_FACTOR: f64 = 2.0;

/// KLL sketch over `f64` items.
#[derive(Clone, Debug)]
pub struct KllSketch {
    capacity: usize,
    levels: Vec<Vec<f64>>,
    count: u64,
    rng: RandomSource,
}

impl KllSketch {
    /// Creates a sketch targeting rank accuracy `rho_prime * n`: the
    /// level-zero capacity is `max(2, ceil(2 / rho_prime))`. Streams no
    /// longer than the capacity are stored exactly.
    pub fn new(rho_prime: f64, rng: RandomSource) -> Result<Self> {
        if !rho_prime.is_finite() || rho_prime <= 0.0 || rho_prime > 1.0 {
            return Err(Error::InvalidParameter(format!(
                "accuracy rho' must be in (0, 1], got {rho_prime}"
            )));
        }
        let capacity = (2.0 / rho_prime).ceil() as usize;
        if capacity > MAX_CAPACITY {
            return Err(Error::InvalidParameter(format!(
                "sketch capacity {capacity} exceeds the size limit"
            )));
        }
        Ok(KllSketch {
            capacity: capacity.max(2),
            levels: vec![Vec::new()],
            count: 0,
            rng,
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Number of items inserted so far.
    pub fn count(&self) -> u64 {
        self.count
    }

    /// Number of items currently stored across all levels.
    pub fn stored(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }

    /// Capacity of `level`, decaying with depth below the newest level.
    fn level_capacity(&self, level: usize) -> usize {
        let depth = (self.levels.len() - 1 - level) as i32;
        let cap = self.capacity as f64 * (2.0f64 / 3.0).powi(depth);
        (cap.ceil() as usize).max(2)
    }

    /// Inserts one item.
    pub fn update(&mut self, x: f64) -> Result<()> {
        if !x.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "sketch items must be finite, got {x}"
            )));
        }
        self.levels[0].push(x);
        self.count += 1;
        self.compact_overfull();
        Ok(())
    }

    fn compact_overfull(&mut self) {
        loop {
            let over = (0..self.levels.len())
                .find(|&l| self.levels[l].len() > self.level_capacity(l));
            let Some(l) = over else { break };
            self.compact_level(l);
        }
    }

    /// Promotes half of a sorted level. Keeping every second item at double
    /// weight conserves represented weight exactly; the odd leftover stays.
    fn compact_level(&mut self, l: usize) {
        self.levels[l].sort_by(f64::total_cmp);
        let len = self.levels[l].len();
        let pairs = len / 2;
        let offset = usize::from(self.rng.coin());
        let mut promoted = Vec::with_capacity(pairs);
        for i in 0..pairs {
            promoted.push(self.levels[l][2 * i + offset]);
        }
        let leftover = if len % 2 == 1 {
            Some(self.levels[l][len - 1])
        } else {
            None
        };
        self.levels[l].clear();
        self.levels[l].extend(leftover);
        if self.levels.len() == l + 1 {
            self.levels.push(Vec::new());
        }
        self.levels[l + 1].extend(promoted);
    }

    /// Estimated rank of `q`: the represented number of items `<= q`.
    pub fn rank(&self, q: f64) -> u64 {
        self.levels
            .iter()
            .enumerate()
            .map(|(l, items)| {
                let below = items.iter().filter(|&&x| x <= q).count() as u64;
                below << l
            })
            .sum()
    }

    /// Total weight represented by the stored items. Always equals
    /// [`Self::count`]; exposed so tests can assert the conservation law.
    pub fn represented_weight(&self) -> u64 {
        self.levels
            .iter()
            .enumerate()
            .map(|(l, items)| (items.len() as u64) << l)
            .sum()
    }
}

/// Opens a differentially private rank-query session over `data`.
///
/// The session answers up to `k` adaptively chosen rank queries. Each run
/// of the underlying sketch is built at accuracy
/// `rho' = rho * epsilon / (k * ln(k / beta))`, its rank error is declared
/// with the measured diameter [`KLL_RANK_DIAMETER_FACTOR`]` * rho' * n`,
/// and every answer carries Laplace noise calibrated for `k` shared
/// queries. Element-change neighbors move any rank by at most one, so
/// `delta1 = 1`.
pub fn private_rank_session(
    data: &[f64],
    rho: f64,
    budget: &PrivacyBudget,
    beta: f64,
    k: u32,
    rng: &mut RandomSource,
) -> Result<QuerySession<f64>> {
    if data.is_empty() {
        return Err(Error::InvalidParameter(
            "rank queries need a nonempty dataset".into(),
        ));
    }
    if !rho.is_finite() || rho <= 0.0 || rho > 1.0 {
        return Err(Error::InvalidParameter(format!(
            "accuracy rho must be in (0, 1], got {rho}"
        )));
    }
    if !beta.is_finite() || beta <= 0.0 || beta >= 0.5 {
        return Err(Error::InvalidParameter(format!(
            "failure probability beta must be in (0, 1/2), got {beta}"
        )));
    }
    if k < 1 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let n = data.len() as f64;
    let rho_prime = rho * budget.epsilon() / (k as f64 * (k as f64 / beta).ln());
    let delta2 = KLL_RANK_DIAMETER_FACTOR * rho_prime * n;
    let sens = SensitivitySpec::new(1.0, delta2, k)?;
    let data = data.to_vec();
    open_session(
        move |sketch_rng: &mut RandomSource| {
            let mut sketch = KllSketch::new(rho_prime, sketch_rng.fork())?;
            for &x in &data {
                sketch.update(x)?;
            }
            Ok(Box::new(move |q: &f64| sketch.rank(*q) as f64) as Queryable<f64>)
        },
        &sens,
        budget,
        rng,
    )
}
