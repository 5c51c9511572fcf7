//! Deterministic random streams.
//!
//! Every experiment has one root seed. Independent streams for each
//! simulation, prior reference sample, optimizer restart and so on are
//! carved out of it with ChaCha's 64-bit stream counter, so results do not
//! depend on how work is scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// What a stream is used for. Keeps streams for different purposes disjoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Observed = 1,
    Candidate = 2,
    PriorReference = 3,
    Optimizer = 4,
    Metric = 5,
    Baseline = 6,
    Scan = 7,
    Repeat = 8,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream `(purpose, a, b)` of the generator seeded by `root`.
pub fn stream(root: u64, purpose: Purpose, a: u64, b: u64) -> Rng {
    let id = splitmix64(splitmix64(splitmix64(purpose as u64) ^ a) ^ b);
    let mut rng = ChaCha8Rng::seed_from_u64(root);
    rng.set_stream(id);
    rng
}

/// A child seed, for handing a whole sub-experiment its own root.
pub fn child_seed(root: u64, purpose: Purpose, index: u64) -> u64 {
    splitmix64(root ^ splitmix64((purpose as u64) << 32 ^ index))
}

/// Plain generator from a seed, for tests and one-off use.
pub fn from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
