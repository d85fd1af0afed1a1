//! Counter-based random streams.
//!
//! A [`RandomStream`] is addressed by `(master_seed, context_id, counter)`.
//! The master seed keys a ChaCha8 cipher, the context id selects the cipher
//! stream, and the counter selects the starting 64-byte block inside it. Two
//! streams with the same address produce the same sequence no matter what
//! other streams were consumed before or concurrently.
//!
//! Streams started at counters `c` and `c + k` overlap once the first has
//! consumed more than `k` blocks (8 `u64` draws per block); callers that carve
//! a context into ranges must respect that spacing.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

const WORDS_PER_BLOCK: u128 = 16;

/// Number of `u64` draws available per counter block.
pub const DRAWS_PER_BLOCK: u64 = 8;

#[derive(Clone, Debug)]
pub struct RandomStream {
    master_seed: u64,
    context_id: u64,
    counter: u64,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(master_seed: u64, context_id: u64, counter: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(context_id);
        rng.set_word_pos(u128::from(counter) * WORDS_PER_BLOCK);
        Self {
            master_seed,
            context_id,
            counter,
            rng,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn context_id(&self) -> u64 {
        self.context_id
    }

    /// Counter block at which this stream started.
    pub fn counter(&self) -> u64 {
        self.counter
    }

    /// Fresh stream in the same context, starting `offset` blocks after this
    /// stream's starting counter.
    pub fn at_offset(&self, offset: u64) -> Self {
        Self::new(
            self.master_seed,
            self.context_id,
            self.counter.wrapping_add(offset),
        )
    }

    /// Fresh stream on another context with the same master seed.
    pub fn with_context(&self, context_id: u64) -> Self {
        Self::new(self.master_seed, context_id, 0)
    }

    /// Stream on a context derived from this one and `index`; used to give
    /// each of several related estimates its own independent sequence.
    pub fn subcontext(&self, index: u64) -> Self {
        Self::new(self.master_seed, mix64(self.context_id ^ mix64(index)), 0)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 bits of resolution.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
