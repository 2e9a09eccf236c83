//! Seedable, portable random number generation.
//!
//! Every randomized operation in this crate (dataset splits, mosaic crops,
//! frame sampling) takes an explicit 64-bit seed and derives all of its
//! draws from this generator, so results reproduce bit-for-bit across
//! runs, platforms, and reimplementations in other languages.
//!
//! The generator is SplitMix64 (Steele, Lea & Flood; the `java.util`
//! reference implementation). One step:
//!
//! ```text
//! state += 0x9E3779B97F4A7C15
//! z = state
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//! output = z ^ (z >> 31)
//! ```
//!
//! all in wrapping 64-bit arithmetic. Bounded draws use rejection
//! sampling (see [`SplitMix64::next_below`]), so they are exactly
//! uniform, not merely approximately so.

/// SplitMix64 generator state.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    /// Next raw 64-bit output.
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(Self::GOLDEN_GAMMA);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform draw from `0..bound` (exclusive), unbiased.
    ///
    /// Rejection scheme: discard raw outputs below `2^64 mod bound`
    /// (computed as `bound.wrapping_neg() % bound`), then reduce modulo
    /// `bound`. The surviving range is an exact multiple of `bound`.
    ///
    /// # Panics
    /// Panics when `bound` is zero.
    pub fn next_below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "bound must be positive");
        let threshold = bound.wrapping_neg() % bound;
        loop {
            let r = self.next_u64();
            if r >= threshold {
                return r % bound;
            }
        }
    }
}
