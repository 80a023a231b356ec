//! Seeded random streams.
//!
//! Every randomized step draws from its own ChaCha stream derived from the
//! master seed and a stream number, so output never depends on evaluation
//! order or worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The random stream type used throughout the crate.
pub type Stream = ChaCha8Rng;

/// Stream number for failure-pool construction.
pub const POOL_STREAM: u64 = 0;
/// Stream number for the post-assembly shuffle.
pub const SHUFFLE_STREAM: u64 = 1;
/// Stream number for stratified splitting.
pub const SPLIT_STREAM: u64 = 2;
/// Stream number for training-set oversampling.
pub const OVERSAMPLE_STREAM: u64 = 3;
/// Stream number for picking records in a sampled audit.
pub const AUDIT_STREAM: u64 = 4;

const RECORD_STREAM_BASE: u64 = 1 << 32;

/// Returns stream `stream` of the master seed.
pub fn stream(seed: u64, stream: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Returns the stream owned by the record at generation position `index`.
pub fn record_stream(seed: u64, index: usize) -> Stream {
    stream(seed, RECORD_STREAM_BASE + index as u64)
}
