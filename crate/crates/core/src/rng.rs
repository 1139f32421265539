//! Seeding rules. Every random draw in the crate comes from a `ChaCha8Rng`
//! seeded either by a user seed or by a sub-seed derived from it here.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Sub-seed for stream `index` of `master`: `mix(master + (index + 1) * golden)`.
///
/// Trial `t` of a rounding run uses `sub_seed(seed, t)`; distinct streams of the
/// same master never share a seed in practice and the rule is stable across
/// releases so that recorded transcripts stay reproducible.
pub fn sub_seed(master: u64, index: u64) -> u64 {
    mix(master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15)))
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_distinct_and_stable() {
        let a: Vec<u64> = (0..64).map(|i| sub_seed(7, i)).collect();
        let mut b = a.clone();
        b.sort_unstable();
        b.dedup();
        assert_eq!(b.len(), a.len());
        assert_eq!(sub_seed(7, 3), sub_seed(7, 3));
        let x: u64 = rng_from_seed(5).random();
        let y: u64 = rng_from_seed(5).random();
        assert_eq!(x, y);
    }
}
