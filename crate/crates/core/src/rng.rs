//! Seeded random streams.
//!
//! Every stream is a ChaCha8 generator keyed by the 64-bit experiment seed
//! (expanded with `seed_from_u64`) and selected by a 64-bit stream id, so
//! independent substreams never depend on scheduling or thread count.
//! Uniform reals take the top 53 bits of a `u64`; normals use the
//! `rand_distr` ziggurat sampler.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream ids for dataset samples occupy the low half of the id space.
const PARAM_STREAM_TAG: u64 = 1 << 63;
const AUX_STREAM_TAG: u64 = 1 << 62;

/// Generator for dataset sample `index`.
pub fn sample_stream(seed: u64, index: u64) -> ChaCha8Rng {
    stream(seed, index & !(PARAM_STREAM_TAG | AUX_STREAM_TAG))
}

/// Generator for parameter initialization draw `trial`.
pub fn param_stream(seed: u64, trial: u64) -> ChaCha8Rng {
    stream(seed, PARAM_STREAM_TAG | (trial & !PARAM_STREAM_TAG))
}

/// Generator for auxiliary, non-experimental randomness (solver start vectors).
pub fn aux_stream(seed: u64) -> ChaCha8Rng {
    stream(seed, AUX_STREAM_TAG)
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}
