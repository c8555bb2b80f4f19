//! Deterministic random sampling helpers.
//!
//! All randomness in the crate flows through a seeded ChaCha8 stream, so a
//! `u64` seed fully determines suites, sample points, and test coefficients
//! across platforms.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Seeded deterministic generator.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform draw from `[0, 1)` using the top 53 bits of the stream.
#[inline]
pub fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0)
}

/// Uniform draw from `[lo, hi)`.
#[inline]
pub fn range(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * unit(rng)
}

/// Uniform draw from `{0, 1, ..., n-1}`.
#[inline]
pub fn index(rng: &mut ChaCha8Rng, n: usize) -> usize {
    (unit(rng) * n as f64) as usize % n.max(1)
}
