//! Counter-based random number streams.
//!
//! Every source of randomness in the crate is a ChaCha stream keyed by a
//! master seed plus an integer path, e.g. `(master, [n_index, replication])`.
//! Distinct paths give statistically independent streams, and a stream's
//! output never depends on which thread consumes it, which is what makes the
//! parallel experiments reproducible.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Master seed for an experiment or a single sampling call.
pub type RandomSeed = u64;

/// A private random stream handed to sampling and coupling routines.
pub type RngStream = ChaCha8Rng;

const GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finaliser.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Collapses `(master, path)` into a single sub-seed.
pub fn derive_seed(master: RandomSeed, path: &[u64]) -> u64 {
    let mut state = mix(master.wrapping_add(GAMMA));
    for &p in path {
        state = mix(state ^ mix(p.wrapping_add(GAMMA)));
    }
    state
}

/// Creates the stream keyed by `(master, path)`.
pub fn stream(master: RandomSeed, path: &[u64]) -> RngStream {
    let mut state = derive_seed(master, path);
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_mut(8) {
        state = state.wrapping_add(GAMMA);
        chunk.copy_from_slice(&mix(state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}
