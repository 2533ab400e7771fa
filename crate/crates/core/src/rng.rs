//! Seeding helpers shared by generators and experiment drivers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator used for every seeded draw in the crate.
pub type SeededRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Counter-based child seed: the `index`-th stream of `master` on `lane`.
///
/// Children depend only on `(master, lane, index)`, so replications can be
/// fanned out to workers in any order.
pub fn derive_seed(master: u64, lane: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master ^ splitmix64(lane)).wrapping_add(index))
}
