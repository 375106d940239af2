//! Seeded, portable random streams.
//!
//! Every random object in the crate is drawn from a [`ChaCha8Rng`]. Sweeps
//! derive one independent seed per work item with [`derive_seed`], so a single
//! `u64` printed next to a result is enough to regenerate the object.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for work item `(dim, index)` of a run seeded with `seed`.
pub fn derive_seed(seed: u64, dim: usize, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ dim as u64) ^ index)
}
