//! Seeded randomness.
//!
//! Every Monte Carlo trial owns a ChaCha8 generator keyed by
//! `(seed, method, grid index, trial index)`, so results do not depend on
//! scheduling or thread count.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `method` slot of the data stream shared by every method in a cell, so
/// that methods are compared on identical bits.
pub const SHARED_BITS: u64 = 1 << 33;

/// Independent generator for one trial.
pub fn substream(seed: u64, method: u64, grid: u64, trial: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    for (chunk, word) in key.chunks_exact_mut(8).zip([seed, method, grid, trial]) {
        chunk.copy_from_slice(&word.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Source of `W ~ Uniform[0, 1]` draws for randomized intervals.
pub trait UniformSource {
    fn next_uniform(&mut self) -> f64;
}

impl<R: RngCore> UniformSource for R {
    fn next_uniform(&mut self) -> f64 {
        self.random::<f64>()
    }
}

/// Always returns the same draw; `Fixed(1.0)` turns every randomized
/// interval into its deterministic counterpart.
#[derive(Debug, Clone, Copy)]
pub struct Fixed(pub f64);

impl UniformSource for Fixed {
    fn next_uniform(&mut self) -> f64 {
        self.0
    }
}

/// Infinite stream of `Bernoulli(p)` bits.
#[derive(Debug, Clone)]
pub struct BernoulliStream<R> {
    rng: R,
    p: f64,
}

impl<R: RngCore> BernoulliStream<R> {
    pub fn new(rng: R, p: f64) -> Self {
        BernoulliStream { rng, p }
    }
}

impl<R: RngCore> Iterator for BernoulliStream<R> {
    type Item = bool;

    fn next(&mut self) -> Option<bool> {
        Some(self.rng.random::<f64>() < self.p)
    }
}
