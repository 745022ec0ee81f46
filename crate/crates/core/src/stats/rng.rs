//! Seeded random streams.
//!
//! Every stream is a SplitMix64 generator (state advance by the 64-bit
//! golden-ratio increment `0x9E3779B97F4A7C15`, Stafford "Mix13" output
//! finalizer). Stream `k` of seed `s` starts from the first output of a
//! SplitMix64 seeded with `s + k * 0x9E3779B97F4A7C15` (wrapping), so a
//! stream depends only on `(s, k)` and never on scheduling order.

use rand::{Rng, RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

/// Identifier printed by `--version`.
pub const PRNG_ID: &str = "splitmix64";

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

pub type Stream = SplitMix64;

pub fn stream(seed: u64, index: u64) -> Stream {
    let mut root = SplitMix64::seed_from_u64(seed.wrapping_add(index.wrapping_mul(GOLDEN)));
    SplitMix64::seed_from_u64(root.next_u64())
}

/// Uniform index in `0..n`; sampled on `u64` so 32-bit hosts agree.
pub fn uniform_index(rng: &mut Stream, n: usize) -> usize {
    rng.random_range(0..n as u64) as usize
}

/// Uniform in `[0, 1)` with 53 random bits.
pub fn uniform01(rng: &mut Stream) -> f64 {
    rng.random::<f64>()
}
