//! Seeded random streams.
//!
//! Every stochastic component draws from a `ChaCha8Rng`. Batches derive one
//! independent substream per (purpose, instance) pair from the master seed so
//! that instances can run in any order, or concurrently, and still replay
//! bit-for-bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Substream purposes. Distinct purposes never share a ChaCha stream id.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Catalog = 1,
    Workflow = 2,
    Execution = 3,
    Detection = 4,
    Users = 5,
}

pub fn seeded(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent substream `index` of `purpose` under `master`.
pub fn substream(master: u64, purpose: Stream, index: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(((purpose as u64) << 48) ^ index);
    rng
}
