//! Seeded random streams.
//!
//! Every random draw derives from one 64-bit seed. Independent consumers take
//! distinct stream ids of the same ChaCha8 key, so adding draws to one stream
//! never perturbs another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Generator for stream `stream` of `seed`.
pub fn stream(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream id for sub-stream `index` of a consumer family `family`.
pub const fn stream_id(family: u32, index: u32) -> u64 {
    ((family as u64) << 32) | index as u64
}
