//! Seeded randomness.
//!
//! Every random draw in the crate goes through [`seeded`], which builds a
//! xoshiro256++ generator whose state is expanded from the 64-bit seed with
//! SplitMix64. Both algorithms are fixed and platform independent, so a seed
//! reproduces the same stream everywhere.
//!
//! Sub-seeds for independent components are derived from a master seed and a
//! component name with [`derive_seed`]; per-record streams (for example one
//! per evaluation case) use [`derive_seed_pair`] so results do not depend on
//! processing order.

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

pub type Rng = Xoshiro256PlusPlus;

pub fn seeded(seed: u64) -> Rng {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

/// One SplitMix64 output step.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Sub-seed for a named component: `splitmix64(seed ^ fnv1a(component))`.
pub fn derive_seed(seed: u64, component: &str) -> u64 {
    splitmix64(seed ^ fnv1a(component.as_bytes()))
}

/// Sub-seed keyed by an ordered pair of indices.
pub fn derive_seed_pair(seed: u64, a: u64, b: u64) -> u64 {
    splitmix64(splitmix64(seed ^ splitmix64(a)) ^ b.rotate_left(17))
}

/// Deterministic uniform value in `[0, 1)` keyed by `(seed, a, b)`.
pub fn unit_hash(seed: u64, a: u64, b: u64) -> f64 {
    (derive_seed_pair(seed, a, b) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
