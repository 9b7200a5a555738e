//! Counter-based random streams.
//!
//! Every Monte Carlo work item `i` draws from ChaCha8 keyed by the master seed
//! with stream id `i`, so results never depend on scheduling or worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

/// Random stream for work item `index` under `seed`.
pub fn stream(seed: u64, index: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
