//! Seed derivation.
//!
//! Every random quantity is drawn from a ChaCha8 stream selected by
//! `(master seed, stream id)`, so results never depend on evaluation order or
//! on how work is split across threads.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Independent stream `stream` under `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Generator seeded directly from a stored 64-bit seed.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds a sequence of labels into a child seed of `seed`.
pub fn derive_seed(seed: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(mix64(seed), |acc, &p| mix64(acc ^ mix64(p)))
}

/// Stable 64-bit hash of a string (FNV-1a), used to key derived seeds by name.
pub fn str_key(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Packed fair ±1 signs for a `dim`-dimensional Rademacher vector; bit set
/// means +1.
pub fn rademacher_words<R: RngCore + ?Sized>(rng: &mut R, dim: usize) -> Vec<u64> {
    (0..dim.div_ceil(64)).map(|_| rng.next_u64()).collect()
}

#[inline]
pub fn sign_bit(words: &[u64], k: usize) -> bool {
    (words[k >> 6] >> (k & 63)) & 1 == 1
}

/// `ω·x` for the sign vector packed in `words`.
pub fn signed_dot(words: &[u64], x: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (k, &v) in x.iter().enumerate() {
        if sign_bit(words, k) {
            acc += v;
        } else {
            acc -= v;
        }
    }
    acc
}
