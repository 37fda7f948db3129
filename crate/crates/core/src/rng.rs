//! Seeded, portable random number generation.
//!
//! Every stochastic stage draws from a ChaCha8 stream created here, so a
//! recorded seed reproduces any artifact byte for byte on any platform.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Creates the generator used throughout the pipeline.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives a stage-specific seed from a base seed and a label, so that one
/// root seed drives many independent streams without overlap.
///
/// Uses FNV-1a over the label followed by a splitmix64 finalizer. Both are
/// fixed algorithms, unlike the std hasher, so derived seeds are stable
/// across builds and platforms.
pub fn derive_seed(base: u64, label: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in label.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x100000001b3);
    }
    splitmix64(base ^ h)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}
