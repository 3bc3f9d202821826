//! Seeded random streams.
//!
//! Every random draw in the crate comes from an explicit [`SeedStream`] value,
//! so results are a pure function of the seed.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug)]
pub struct SeedStream {
    seed: u64,
    inner: ChaCha8Rng,
}

impl SeedStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// An independent stream for sub-task `index` of a run seeded with `seed`.
    pub fn derived(seed: u64, index: u64) -> Self {
        Self::new(derive_seed(seed, index))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

impl RngCore for SeedStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// SplitMix64 mixing of `(seed, index)`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
