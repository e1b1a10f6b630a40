//! Deterministic derivation of independent RNG streams.
//!
//! Every random draw in a run comes from a ChaCha8 generator whose seed is
//! derived from the master seed and a list of tags (cell coordinates plus a
//! purpose tag), so results do not depend on execution order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Purpose tags. Distinct values keep streams for different uses apart.
pub mod purpose {
    pub const BASE_NEURONS: u64 = 1;
    pub const STREAM: u64 = 2;
    pub const SWITCH_NEURONS: u64 = 3;
    pub const CENTROIDS: u64 = 4;
    pub const SEARCH: u64 = 5;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_seed(master: u64, tags: &[u64]) -> u64 {
    tags.iter()
        .fold(splitmix64(master), |acc, &t| splitmix64(acc ^ splitmix64(t)))
}

pub fn rng_for(master: u64, tags: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, tags))
}
