//! Seedable random source for simulations.
//!
//! The generator is ChaCha20 (`rand_chacha::ChaCha20Rng`). A 64-bit seed is
//! placed little-endian in the first 8 bytes of the 32-byte key, the other 24
//! bytes are zero, and `stream` selects the ChaCha stream. Uniform reals take
//! the top 53 bits of one `next_u64` output, so sequences are identical on
//! every platform.

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

#[derive(Debug, Clone)]
pub struct SimRng {
    inner: ChaCha20Rng,
}

impl SimRng {
    pub fn new(seed: u64) -> Self {
        SimRng::for_stream(seed, 0)
    }

    /// Independent sub-generator, e.g. one per Monte Carlo shard.
    pub fn for_stream(seed: u64, stream: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        let mut inner = ChaCha20Rng::from_seed(key);
        inner.set_stream(stream);
        SimRng { inner }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `[0, 1)` with 53 bits of resolution.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform integer in `0..n` (rejection sampling, no modulo bias).
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below(0)");
        let zone = u64::MAX - (u64::MAX % n);
        loop {
            let x = self.next_u64();
            if x < zone {
                return x % n;
            }
        }
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    /// Random point of the probability simplex with `n` entries (flat Dirichlet).
    pub fn simplex_point(&mut self, n: usize) -> Vec<f64> {
        let raw: Vec<f64> = (0..n).map(|_| -(1.0 - self.uniform()).ln()).collect();
        let sum: f64 = raw.iter().sum();
        raw.into_iter().map(|x| x / sum).collect()
    }
}

/// Inverse-CDF sampler over a finite weight vector.
#[derive(Debug, Clone)]
pub struct DiscreteSampler {
    cumulative: Vec<f64>,
    last_positive: usize,
}

impl DiscreteSampler {
    pub fn new(weights: &[f64]) -> Self {
        let mut acc = 0.0;
        let cumulative = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        let last_positive = weights.iter().rposition(|&w| w > 0.0).unwrap_or(0);
        DiscreteSampler {
            cumulative,
            last_positive,
        }
    }

    pub fn sample(&self, rng: &mut SimRng) -> usize {
        let total = *self.cumulative.last().expect("empty sampler");
        let u = rng.uniform() * total;
        self.cumulative.partition_point(|&c| c <= u).min(self.last_positive)
    }
}
