//! Seeded random streams.
//!
//! Every independent task (one null set, one group, one generator) draws from
//! its own ChaCha stream keyed by `(master seed, task index)`, so results do
//! not depend on thread count or scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Stream `task` of the master `seed`.
pub fn task_stream(seed: u64, task: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(task);
    rng
}

pub fn stream(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
