//! Reproducible random streams.
//!
//! Every replication `r` of an experiment with master seed `s` draws from
//! ChaCha8 keyed by `s` on stream `r`. Streams are disjoint, so the data of a
//! replication does not depend on which thread runs it or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use rand_chacha::ChaCha8Rng as StreamRng;

/// Tag for the coefficient matrix of a linear model, drawn once per experiment.
pub const COEFFICIENT_TAG: u64 = 0xC0EF_F1C1_E47A_0001;

/// Generator for replication `replication` under `master_seed`.
pub fn replication_rng(master_seed: u64, replication: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(replication);
    rng
}

/// Deterministic sub-seed for a purpose tag (SplitMix64 finaliser on both words).
pub fn derive_seed(master_seed: u64, tag: u64) -> u64 {
    splitmix64(master_seed ^ splitmix64(tag))
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
