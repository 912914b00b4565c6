//! Deterministic randomness and stable hashing.
//!
//! Replay tests require byte-identical runs across builds and platforms, so
//! the crate carries its own small PRNG and hash instead of depending on a
//! generator whose stream may change between library versions.

/// SplitMix64 pseudo-random generator.
///
/// Passes through the full 2^64 state space with a fixed, documented stream;
/// good enough for sampling parents, niches, and test fixtures.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform float in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `[0, n)`. `n` must be non-zero.
    pub fn next_below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        self.next_u64() % n
    }

    /// Bernoulli draw with probability `p`.
    pub fn chance(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    /// Derives an independent substream. Advances this generator.
    pub fn fork(&mut self, salt: u64) -> Self {
        Self::new(self.next_u64() ^ salt)
    }
}

/// FNV-1a 64-bit hash. Stable across platforms and releases.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01B3);
    }
    hash
}

/// Substream seed derived from a base seed and a string label.
///
/// Used to give each query its own generator so that re-running a single
/// stage reproduces the exact stream of the full run.
pub fn labeled_seed(base: u64, label: &str) -> u64 {
    base ^ fnv1a64(label.as_bytes())
}
