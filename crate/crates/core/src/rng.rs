//! Seeded randomness. Every random choice in the crate flows from an
//! explicit `u64` seed through [`TrialRng`].

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type TrialRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> TrialRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the seed of stream `index` under `master`: `mix64(master ^ index)`.
///
/// Trials use `split_seed(master_seed, trial)`; sub-streams inside a trial
/// (instance, sample, each selector) use `split_seed(trial_seed, tag)`.
pub fn split_seed(master: u64, index: u64) -> u64 {
    mix64(master ^ index)
}
