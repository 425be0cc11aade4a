//! Seeded randomness helpers shared by the experiment, sampling and fixture
//! code.
//!
//! Everything random in this crate flows through ChaCha8 seeded from a single
//! `u64`, with the bounded-integer draw implemented here (Lemire's
//! multiply-shift rejection method) rather than borrowed from a helper crate.
//! That keeps the exact byte streams — and therefore every split, sample and
//! fixture — reproducible from the seed alone, independent of dependency
//! upgrades.

use rand_chacha::ChaCha8Rng;
use rand_core::{Rng, SeedableRng};

pub(crate) fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Unbiased draw from `0..bound`. `bound` must be nonzero.
pub(crate) fn uniform_index(rng: &mut ChaCha8Rng, bound: usize) -> usize {
    debug_assert!(bound > 0);
    let bound = bound as u64;
    // Accept x iff x * bound does not fall in the truncated final interval.
    let threshold = bound.wrapping_neg() % bound;
    loop {
        let m = u128::from(rng.next_u64()) * u128::from(bound);
        if (m as u64) >= threshold {
            return (m >> 64) as usize;
        }
    }
}

/// Uniform draw from `[0, 1)` with 53 random bits.
pub(crate) fn unit_f64(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Fisher-Yates shuffle of the first `k` positions: afterwards `s[..k]` is a
/// uniform ordered sample of the slice without replacement.
pub(crate) fn partial_shuffle<T>(rng: &mut ChaCha8Rng, s: &mut [T], k: usize) {
    let n = s.len();
    let k = k.min(n);
    for i in 0..k {
        let j = i + uniform_index(rng, n - i);
        s.swap(i, j);
    }
}

pub(crate) fn shuffle<T>(rng: &mut ChaCha8Rng, s: &mut [T]) {
    let n = s.len();
    partial_shuffle(rng, s, n.saturating_sub(1));
}
