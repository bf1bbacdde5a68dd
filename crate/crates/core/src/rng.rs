//! Portable random streams.
//!
//! Every draw goes through [`SimRng`], a ChaCha8 keystream keyed by a 64-bit
//! seed and a 64-bit stream id. The conversions from raw `u64` words to
//! floats and bounded integers are fixed here so that another implementation
//! can reproduce instances bit for bit:
//!
//! * key: the 32-byte ChaCha seed is `seed` as little-endian `u64` in bytes
//!   0..8, zeros elsewhere; the stream id is ChaCha's 64-bit nonce.
//! * `uniform()`: `(next_u64() >> 11) * 2^-53`, in `[0, 1)`.
//! * `below(n)`: `(next_u64() as u128 * n as u128) >> 64`, in `0..n`.
//! * `exponential(rate)`: `-ln(1 - uniform()) / rate`.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Stream id reserved for arrival times.
pub const ARRIVAL_STREAM: u64 = 0;

/// Stream id for the job with the given generation index.
pub fn job_stream(job_index: usize) -> u64 {
    1 + job_index as u64
}

#[derive(Debug, Clone)]
pub struct SimRng {
    inner: ChaCha8Rng,
}

impl SimRng {
    pub fn new(seed: u64) -> Self {
        Self::stream(seed, 0)
    }

    pub fn stream(seed: u64, stream: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        let mut inner = ChaCha8Rng::from_seed(key);
        inner.set_stream(stream);
        Self { inner }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Continuous uniform on `[lo, hi)`.
    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "below(0)");
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }

    /// Discrete uniform on the inclusive range `lo..=hi`.
    pub fn int_range(&mut self, lo: usize, hi: usize) -> usize {
        lo + self.below(hi - lo + 1)
    }

    pub fn exponential(&mut self, rate: f64) -> f64 {
        -(1.0 - self.uniform()).ln() / rate
    }

    /// `k` distinct values from `0..n` via a partial Fisher-Yates shuffle,
    /// in draw order.
    pub fn choose_distinct(&mut self, n: usize, k: usize) -> Vec<usize> {
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.below(n - i);
            pool.swap(i, j);
        }
        pool.truncate(k);
        pool
    }
}

/// SplitMix64 finalizer, used to derive child seeds from a parent seed.
pub fn mix_seed(parts: &[u64]) -> u64 {
    let mut h: u64 = 0x9E37_79B9_7F4A_7C15;
    for &p in parts {
        let mut z = h ^ p.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        h = z ^ (z >> 31);
    }
    h
}
