//! Counter-based Gaussian stream.
//!
//! Every sample is a pure function of `(seed, stream, index)`: the ChaCha8
//! block function is keyed by the seed, the stream selects the nonce and the
//! index the position inside the keystream. Rows can therefore be generated
//! in any order or in parallel with bit-identical results.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use statrs::distribution::{ContinuousCDF, Normal};

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Order-sensitive hash of a word sequence.
pub fn hash_words(words: &[u64]) -> u64 {
    words
        .iter()
        .fold(0x6A09_E667_F3BC_C909, |acc, &w| mix64(acc ^ mix64(w)))
}

#[derive(Debug, Clone)]
pub struct CounterRng {
    key: [u8; 32],
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        let mut key = [0u8; 32];
        let mut state = seed;
        for chunk in key.chunks_exact_mut(8) {
            state = mix64(state);
            chunk.copy_from_slice(&state.to_le_bytes());
        }
        Self { key }
    }

    fn stream_at(&self, stream: u64, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(stream);
        // one u64 = two 32-bit keystream words
        rng.set_word_pos(2 * index as u128);
        rng
    }

    /// Uniform in the open interval (0, 1).
    pub fn uniform(&self, stream: u64, index: u64) -> f64 {
        to_open_unit(self.stream_at(stream, index).next_u64())
    }

    /// Standard normal sample via the inverse CDF.
    pub fn normal(&self, stream: u64, index: u64) -> f64 {
        std_normal().inverse_cdf(self.uniform(stream, index))
    }

    /// Fills `out[k]` with `normal(stream, start + k)`.
    pub fn fill_normal(&self, stream: u64, start: u64, out: &mut [f64]) {
        let mut rng = self.stream_at(stream, start);
        let n = std_normal();
        for v in out.iter_mut() {
            *v = n.inverse_cdf(to_open_unit(rng.next_u64()));
        }
    }
}

fn std_normal() -> Normal {
    Normal::standard()
}

fn to_open_unit(x: u64) -> f64 {
    ((x >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}
