//! Deterministic seed derivation.
//!
//! Every stochastic stage takes a master seed and derives per-task seeds from
//! (master, task indices), so serial and parallel execution agree bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StageRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a master seed with a path of task indices.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(master), |acc, &p| {
        splitmix64(acc ^ splitmix64(p.wrapping_add(1)))
    })
}

pub fn rng_for(master: u64, path: &[u64]) -> StageRng {
    StageRng::seed_from_u64(derive_seed(master, path))
}
