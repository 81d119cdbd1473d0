//! Counter-based randomness: every decision is a pure function of
//! `(seed, stream, index)`, independent of iteration order.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Uniform draws addressed by an index rather than by call order.
#[derive(Clone, Debug)]
pub struct KeyedUniform {
    rng: ChaCha8Rng,
}

impl KeyedUniform {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng }
    }

    /// Uniform value in `[0, 1)` for the given index.
    pub fn uniform(&mut self, index: u64) -> f64 {
        // Each index owns a 4-word block of the keystream.
        self.rng.set_word_pos(u128::from(index) * 4);
        self.rng.random::<f64>()
    }

    /// A child seed for a sub-computation, stable in `(seed, stream, index)`.
    pub fn derive_seed(&mut self, index: u64) -> u64 {
        self.rng.set_word_pos(u128::from(index) * 4 + 2);
        self.rng.next_u64()
    }
}

/// Mixes two words into a seed; used to give sub-components independent streams.
pub fn mix_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
