//! Seed derivation and the portable random generator used by every
//! stochastic operation.
//!
//! All randomness is drawn from ChaCha8 streams. Nested randomness never
//! shares a stream: each consumer derives its own seed from
//! `(parent, purpose tag, index)`, so results do not depend on the order in
//! which parallel tasks run.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type SeededRng = ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from a parent seed, a purpose tag and an index.
///
/// The tag is folded with FNV-1a and the three words are mixed with
/// SplitMix64, so distinct `(tag, index)` pairs give unrelated streams.
pub fn derive_seed(parent: u64, tag: &str, index: u64) -> u64 {
    let tag_hash = tag.bytes().fold(FNV_OFFSET, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(FNV_PRIME)
    });
    let mut h = splitmix64(parent);
    h = splitmix64(h ^ tag_hash);
    splitmix64(h ^ index)
}

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform index in `0..bound`, drawn through `u64` so the stream is the
/// same on 32- and 64-bit targets.
pub fn uniform_index(rng: &mut SeededRng, bound: usize) -> usize {
    debug_assert!(bound > 0);
    rng.random_range(0..bound as u64) as usize
}

/// Fisher-Yates shuffle built on [`uniform_index`].
pub fn shuffle<T>(rng: &mut SeededRng, items: &mut [T]) {
    for i in (1..items.len()).rev() {
        let j = uniform_index(rng, i + 1);
        items.swap(i, j);
    }
}

/// Round-half-up, tolerant of representation error just below `.5`
/// (e.g. `0.15 * 10.0`).
pub(crate) fn round_half_up(x: f64) -> usize {
    (x + 0.5 + 1e-9).floor().max(0.0) as usize
}
