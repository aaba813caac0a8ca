//! Seeding: every random draw is a pure function of `(seed, index)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent generator for draw `index` of a run seeded with `seed`.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
