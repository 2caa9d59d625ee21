//! Stable seed derivation.
//!
//! Every stochastic stage takes a `u64` seed. Stage seeds are derived from a
//! single master seed by hashing, so adding a stage never perturbs the others.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    fnv1a64_extend(FNV_OFFSET, bytes)
}

/// Continues an FNV-1a hash from a previous state.
pub fn fnv1a64_extend(mut state: u64, bytes: &[u8]) -> u64 {
    for &b in bytes {
        state ^= u64::from(b);
        state = state.wrapping_mul(FNV_PRIME);
    }
    state
}

/// SplitMix64 finalizer; spreads low-entropy inputs over all 64 bits.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for a named stage of a pipeline run.
pub fn derive_seed(master: u64, stage: &str) -> u64 {
    let h = fnv1a64_extend(fnv1a64(&master.to_le_bytes()), stage.as_bytes());
    splitmix64(h)
}

/// Seed for the `index`-th independent unit (document, cluster, ...) of a stage.
pub fn sub_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index))
}

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn rng_for(seed: u64, key: &str) -> ChaCha8Rng {
    rng(derive_seed(seed, key))
}
