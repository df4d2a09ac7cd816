//! Seeded, stream-addressed randomness.
//!
//! Every randomized operation in this crate draws from a [`RandomSource`]:
//! a ChaCha12 generator addressed by a `(seed, stream_id)` pair. The same
//! pair always reproduces the same bit sequence, and distinct stream ids of
//! the same seed are statistically independent, so trials can run in
//! parallel by giving each its own stream id and the results stay identical
//! to a serial run.
//!
//! A source is single-consumer. Share `(seed, stream_id)` addresses across
//! threads, not sources.

use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

/// Mixes a 64-bit value through the splitmix64 finalizer.
///
/// Used to derive substream ids that do not collide with the small integer
/// ids callers typically choose by hand.
pub(crate) fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Deterministic random source addressed by `(seed, stream_id)`.
#[derive(Clone, Debug)]
pub struct RandomSource {
    seed: u64,
    stream_id: u64,
    rng: ChaCha12Rng,
}

impl RandomSource {
    /// Creates the source for the given address.
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        RandomSource {
            seed,
            stream_id,
            rng,
        }
    }

    /// Seed this source was created with.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Stream id this source was created with.
    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Derives the source for a tagged substream of the same seed.
    ///
    /// Pure: does not advance this source, and the same `(address, tag)`
    /// always yields the same substream. Tags are mixed so that derived
    /// stream ids do not collide with hand-picked small ids.
    pub fn substream(&self, tag: u64) -> RandomSource {
        let sid = splitmix64(self.stream_id ^ splitmix64(tag.wrapping_add(0x5151_dead_beef_0042)));
        RandomSource::new(self.seed, sid)
    }

    /// Splits off an independent child source, advancing this one.
    pub fn fork(&mut self) -> RandomSource {
        let seed = self.next_u64();
        let stream = self.next_u64();
        RandomSource::new(seed, stream)
    }

    /// Next raw 64 bits.
    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform draw from the open interval (0, 1). Never returns 0 or 1,
    /// so it is safe under `ln` and negative-power transforms.
    pub fn open01(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Fair coin.
    pub fn coin(&mut self) -> bool {
        self.next_u64() & 1 == 1
    }

    /// Uniform integer in `[0, n)`. `n` must be nonzero.
    ///
    /// Uses the widening-multiply map; the bias is below `n / 2^64` and
    /// irrelevant at the sample sizes used here.
    pub fn below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        (((self.next_u64() as u128) * (n as u128)) >> 64) as u64
    }
}
