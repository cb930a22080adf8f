//! Seeded randomness. Every randomized routine takes an explicit seed and
//! derives independent sub-streams from fixed labels.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type SeededRng = ChaCha8Rng;

/// Derive a child seed from a parent seed and a fixed label (FNV-1a over the
/// label, mixed with splitmix64).
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    splitmix64(seed ^ splitmix64(h))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn rng_from(seed: u64, label: &str) -> SeededRng {
    SeededRng::seed_from_u64(derive_seed(seed, label))
}

/// One Bernoulli trial. Always consumes exactly one uniform draw so that
/// replaying a stream advances the generator identically.
#[inline]
pub fn bernoulli<R: Rng + ?Sized>(rng: &mut R, probability: f64) -> bool {
    let u: f64 = rng.gen();
    u < probability
}
