//! Counter-based normal variates.
//!
//! A draw is addressed by `(seed, stream, index)`: the ChaCha8 key comes from
//! the seed, the stream selects the ChaCha stream and each index owns four
//! 32-bit words of keystream. Any draw can be regenerated without replaying
//! the ones before it, so results do not depend on scheduling.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Keystream words consumed per normal variate.
const WORDS_PER_DRAW: u128 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CounterNormal {
    seed: u64,
}

impl CounterNormal {
    pub fn new(seed: u64) -> Self {
        CounterNormal { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn rng(&self, stream: u64, index: u64) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.seed.to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(stream);
        rng.set_word_pos(WORDS_PER_DRAW * index as u128);
        rng
    }

    /// Standard normal number `index` of `stream`.
    pub fn normal(&self, stream: u64, index: u64) -> f64 {
        box_muller(&mut self.rng(stream, index))
    }

    /// Fill `out` with draws `start, start + 1, …` of `stream`.
    pub fn fill(&self, stream: u64, start: u64, out: &mut [f64]) {
        let mut rng = self.rng(stream, start);
        out.iter_mut().for_each(|v| *v = box_muller(&mut rng));
    }
}

fn box_muller(rng: &mut ChaCha8Rng) -> f64 {
    // 53-bit uniforms; u1 ∈ (0, 1] keeps the logarithm finite.
    let u1 = ((rng.next_u64() >> 11) as f64 + 1.0) * (1.0 / (1u64 << 53) as f64);
    let u2 = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}
