//! Seed plumbing.
//!
//! Every random choice made while fitting descends from the single `u64` seed
//! of the forest configuration. Tree `i` owns ChaCha stream `i`, so trees can
//! be grown in any order or in parallel and still come out identical.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type ForestRng = ChaCha8Rng;

/// Stream reserved for materializing a finite dictionary.
pub const DICTIONARY_STREAM: u64 = u64::MAX;

pub fn seeded(seed: u64) -> ForestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn stream(seed: u64, stream: u64) -> ForestRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// RNG owned by tree `index` of a forest seeded with `seed`.
pub fn tree_rng(seed: u64, index: usize) -> ForestRng {
    stream(seed, index as u64)
}

pub fn dictionary_rng(seed: u64) -> ForestRng {
    stream(seed, DICTIONARY_STREAM)
}

/// Mixes `seed` and `key` into a new seed (splitmix64 finalizer).
pub fn derive_seed(seed: u64, key: u64) -> u64 {
    let mut z = seed ^ key.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
