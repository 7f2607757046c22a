//! Seeded randomness. Every randomized stage draws from its own ChaCha8
//! stream, derived from the run seed and a fixed stage label, so adding a
//! stage never perturbs another stage's draws.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Recorded in result files so a run can be replayed.
pub const GENERATOR_ID: &str = "ChaCha8Rng(splitmix64(seed ^ fnv1a64(label)))";

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

pub fn stage_seed(seed: u64, label: &str) -> u64 {
    splitmix64(seed ^ fnv1a64(label.as_bytes()))
}

pub fn stage_rng(seed: u64, label: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stage_seed(seed, label))
}
