//! Deterministic random number generation.
//!
//! Every operation in the crate that consumes randomness does so through a
//! ChaCha8 stream keyed by a 64-bit seed, with all floating-point draws
//! produced by the explicit conversions below. The whole pipeline is fixed
//! here so that a given seed yields identical output across runs, platforms,
//! and dependency updates.
//!
//! Sweep cells and per-node attribute streams are keyed by folding their
//! coordinates into a base seed with [`derive_seed`], which keeps every cell
//! independent and reorderable.

pub use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// SplitMix64 step: advances `state` by the golden-ratio increment and
/// returns the finalized output word.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds `parts` into `base`, yielding a sub-seed.
///
/// The fold is a SplitMix64 chain: each part is xored into the running
/// accumulator and mixed once more, so distinct part sequences map to
/// unrelated streams.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    let mut state = base;
    let mut acc = splitmix64(&mut state);
    for &part in parts {
        state = acc ^ part;
        acc = splitmix64(&mut state);
    }
    acc
}

/// ChaCha8 stream keyed by expanding `seed` into 256 bits of SplitMix64
/// output.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    let mut state = seed;
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Uniform double in `[0, 1)` from the top 53 bits of one `u64` draw.
pub fn unit_f64(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform double in `[lo, hi)`.
pub fn uniform_f64(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + unit_f64(rng) * (hi - lo)
}

/// Uniform integer in `[0, n)` by widening multiply; `n` must be nonzero.
pub fn uniform_u64(rng: &mut ChaCha8Rng, n: u64) -> u64 {
    debug_assert!(n > 0);
    ((rng.next_u64() as u128 * n as u128) >> 64) as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derive_seed_is_stable_and_sensitive() {
        let a = derive_seed(1, &[20, 30]);
        assert_eq!(a, derive_seed(1, &[20, 30]));
        assert_ne!(a, derive_seed(1, &[30, 20]));
        assert_ne!(a, derive_seed(2, &[20, 30]));
    }

    #[test]
    fn streams_repeat_per_seed() {
        let mut a = rng_from_seed(42);
        let mut b = rng_from_seed(42);
        for _ in 0..16 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn unit_draws_stay_in_range() {
        let mut rng = rng_from_seed(7);
        for _ in 0..1000 {
            let x = unit_f64(&mut rng);
            assert!((0.0..1.0).contains(&x));
        }
    }

    #[test]
    fn uniform_u64_bounds() {
        let mut rng = rng_from_seed(9);
        for _ in 0..1000 {
            assert!(uniform_u64(&mut rng, 7) < 7);
        }
    }
}
