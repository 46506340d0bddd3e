//! Seed derivation. Every random choice draws from a ChaCha stream keyed by
//! the master seed and a path such as `(domain, stage, vertex, tree vertex)`,
//! so results do not depend on iteration order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub mod domain {
    pub const SYNTH: u64 = 1;
    pub const STARS: u64 = 2;
    pub const DENSE_RETRY: u64 = 3;
    pub const MATCHING: u64 = 4;
    pub const STAGE_RETRY: u64 = 5;
    pub const ROUND: u64 = 6;
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Mixes `path` into `master` one component at a time.
pub fn derive(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix(master), |acc, &k| splitmix(acc ^ splitmix(k)))
}

pub fn rng(master: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(master, path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paths_are_order_sensitive() {
        assert_eq!(derive(1, &[2, 3]), derive(1, &[2, 3]));
        assert_ne!(derive(1, &[2, 3]), derive(1, &[3, 2]));
        assert_ne!(derive(1, &[2]), derive(2, &[2]));
    }
}
