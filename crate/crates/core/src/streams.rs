//! Reproducible random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 generator keyed by the
//! root seed and positioned on a 64-bit stream id. The id encodes the purpose
//! of the draws and the trial index, so results do not depend on how work is
//! split across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Recorded in every output that depends on random draws.
pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha 0.9), stream = purpose<<48 | index";

pub type StreamRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u16)]
pub enum Purpose {
    Estimation = 1,
    FrozenCandidate = 2,
    FrozenBatch = 3,
    Trial = 4,
    Oracle = 5,
    Sweep = 6,
}

/// Generator for `(seed, purpose, index)`.
pub fn stream(seed: u64, purpose: Purpose, index: u64) -> StreamRng {
    debug_assert!(index < 1 << 48);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((purpose as u64) << 48) | index);
    rng
}

/// A child seed, used when one experiment drives several sub-experiments.
pub fn derive_seed(seed: u64, purpose: Purpose, index: u64) -> u64 {
    use rand::RngCore;
    stream(seed, purpose, index).next_u64()
}
