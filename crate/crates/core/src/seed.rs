//! Deterministic derivation of independent rng streams from a master seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a master seed with a path of stream identifiers, e.g.
/// `derive_seed(master, &[game_index, SEAT_STREAM + seat])`.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(master), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

pub fn stream(master: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, path))
}

/// Stream tags used across the crate so that deal, policy and substitution
/// randomness never share a stream.
pub mod tag {
    pub const DEAL: u64 = 0;
    pub const SUBSTITUTE: u64 = 1;
    pub const SEAT_POLICY: u64 = 16;
    pub const SEAT_BOT: u64 = 32;
}
