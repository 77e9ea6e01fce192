//! Seeded, splittable random streams.
//!
//! Every stochastic routine takes an explicit generator. Experiments derive one
//! independent ChaCha stream per `(master seed, stream index)` so a trial can be
//! replayed on its own and trials can run in any order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Generator seeded from a single `u64`.
pub fn seeded(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `stream` of the master `seed`.
///
/// The 256-bit ChaCha key comes from `seed`; the 64-bit stream id selects a
/// non-overlapping keystream.
pub fn stream(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Mix two words into a stream id (SplitMix64 finaliser), used to address
/// `(cell, trial)` pairs in a sweep.
pub fn mix(a: u64, b: u64) -> u64 {
    let mut z = a
        .wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(b)
        .wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
