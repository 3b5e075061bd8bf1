//! Seeded random streams.
//!
//! Every Monte Carlo routine draws from `ChaCha8Rng` seeded with the user
//! seed and switched to an explicit stream number per shard, so a result
//! depends only on (seed, work split), never on thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent generator for `stream` under `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Default number of draws handled by one stream.
pub const SHARD_SIZE: u64 = 1 << 16;

/// Splits `reps` into fixed-size shards: `(stream, count)` pairs.
pub fn shards(reps: u64) -> Vec<(u64, u64)> {
    let full = reps / SHARD_SIZE;
    let rest = reps % SHARD_SIZE;
    let mut out: Vec<(u64, u64)> = (0..full).map(|i| (i, SHARD_SIZE)).collect();
    if rest > 0 {
        out.push((full, rest));
    }
    out
}
