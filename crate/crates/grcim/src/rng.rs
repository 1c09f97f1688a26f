//! Counter-based random streams.
//!
//! Every sample is generated from a generator keyed on `(seed, index)`, so a
//! sample's value never depends on how work is split across threads.

use rand::RngCore;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent 64-bit key from a parent key and an index.
#[inline]
pub fn mix(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index.wrapping_mul(GOLDEN) ^ 0x5851_F42D_4C95_7F2D))
}

/// Folds a list of coordinates into a seed.
pub fn derive_seed(master: u64, coords: &[u64]) -> u64 {
    coords.iter().fold(mix(master, 0xC0FF_EE00), |s, &c| mix(s, c))
}

/// Small generator used for one sample.
#[derive(Debug, Clone)]
pub struct CounterRng {
    state: u64,
}

impl CounterRng {
    pub fn new(seed: u64, index: u64) -> Self {
        Self {
            state: mix(seed, index),
        }
    }
}

impl RngCore for CounterRng {
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        splitmix64(self.state)
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        rand::rand_core::impls::fill_bytes_via_next(self, dst)
    }
}
