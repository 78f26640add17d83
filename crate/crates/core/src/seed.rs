//! Seed derivation tree. Every stochastic component draws from its own
//! ChaCha stream keyed by `(parent seed, label, index)`, so any component can
//! be regenerated in isolation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed for `label` / `index` under `parent`.
pub fn derive(parent: u64, label: u64, index: u64) -> u64 {
    splitmix64(splitmix64(parent ^ splitmix64(label)) ^ index)
}

pub fn rng(parent: u64, label: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(parent, label, index))
}

/// Labels used across the crate. Values are arbitrary but fixed.
pub mod label {
    pub const SEARCH_R1: u64 = 0x5231;
    pub const SEARCH_R2: u64 = 0x5232;
    pub const SEARCH_OUTER: u64 = 0x4f55;
    pub const SOURCE: u64 = 0x5352;
    pub const CODEBOOK: u64 = 0x4342;
    pub const U_BOOK: u64 = 0x5542;
    pub const U_BINS: u64 = 0x5562;
    pub const V_BOOK: u64 = 0x5642;
    pub const V_BINS: u64 = 0x5662;
    pub const W_BOOK: u64 = 0x5742;
    pub const Z_BOOK: u64 = 0x5a42;
    pub const Z_BINS: u64 = 0x5a62;
}
