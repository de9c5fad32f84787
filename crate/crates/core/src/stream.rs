//! Reproducible random streams.
//!
//! Every Monte Carlo trial draws from its own ChaCha8 stream selected by
//! `(master seed, stream id)`. Streams are counter-based, so a trial's
//! randomness does not depend on which worker ran it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type TrialRng = ChaCha8Rng;

/// RNG for stream `stream` under `master`.
pub fn trial_rng(master: u64, stream: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(stream);
    rng
}

/// Stream id for trial `index` of a batch tagged `tag` (e.g. a stratum).
/// Tags occupy the high 24 bits.
#[inline]
pub fn stream_id(tag: u64, index: u64) -> u64 {
    debug_assert!(index < 1 << 40);
    (tag << 40) | index
}

/// SplitMix64 finaliser. Used to derive sub-seeds and to hash points for
/// seeded random functions.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
