//! Seeded randomness.
//!
//! All sampling goes through [`ChaCha8Rng`](rand_chacha::ChaCha8Rng), a
//! portable stream cipher generator with published test vectors, seeded from
//! a single `u64`. Independent sub-streams (per task, per predictor, per
//! image) use seeds from [`derive_seed`], which runs the SplitMix64 output
//! function over `seed + (stream + 1) * 0x9E3779B97F4A7C15`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64_mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for sub-stream `stream` of `seed`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    splitmix64_mix(seed.wrapping_add(stream.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}
