//! Seed derivation.
//!
//! Every random stage draws from its own ChaCha8 stream whose seed is
//! `splitmix64(seed ^ fnv1a64(stage))`. Sub-streams (fold, resample, tree)
//! are derived by appending an index to the stage name, or, where an op
//! documents it, by plain offsetting of the seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StageRng = ChaCha8Rng;

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0100_0000_01b3);
    }
    hash
}

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Seed for a named stage.
pub fn derive(seed: u64, stage: &str) -> u64 {
    splitmix64(seed ^ fnv1a64(stage.as_bytes()))
}

/// Seed for the `index`-th member of a named stage.
pub fn derive_indexed(seed: u64, stage: &str, index: u64) -> u64 {
    splitmix64(derive(seed, stage) ^ splitmix64(index))
}

pub fn rng(seed: u64) -> StageRng {
    ChaCha8Rng::seed_from_u64(seed)
}
