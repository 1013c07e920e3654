//! Seeded random streams.
//!
//! Every random quantity in a run comes from its own ChaCha8 stream. A stream
//! is identified by the master seed, a [`Purpose`] tag and a short list of
//! integer keys (repetition, agent, grid coordinate, ...). The key material is
//! folded with the SplitMix64 finalizer into a single `u64` which then seeds
//! `ChaCha8Rng::seed_from_u64`. Both steps are fixed algorithms, so traces are
//! reproducible across platforms and independent of iteration order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator used for every stream.
pub type StreamRng = ChaCha8Rng;

/// What a stream is used for. The discriminant is part of the key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Purpose {
    CommunicationGraph = 1,
    FeedbackGraph = 2,
    Losses = 3,
    Activations = 4,
    /// Per-agent arm sampling; keyed by (algorithm seed, agent).
    ArmDraws = 5,
    /// Derivation of per-repetition algorithm seeds.
    Repetition = 6,
    Verification = 7,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds the master seed, the purpose and the keys into one 64-bit seed.
pub fn derive_seed(master: u64, purpose: Purpose, keys: &[u64]) -> u64 {
    let mut h = splitmix64(master);
    h = splitmix64(h ^ purpose as u64);
    for &k in keys {
        h = splitmix64(h ^ k);
    }
    h
}

/// Opens the stream identified by `(master, purpose, keys)`.
pub fn substream(master: u64, purpose: Purpose, keys: &[u64]) -> StreamRng {
    StreamRng::seed_from_u64(derive_seed(master, purpose, keys))
}

/// Arm-sampling stream of one agent. The simulator draws exactly one uniform
/// from it per round, active or not, so draw `t` always belongs to round `t`.
pub fn agent_stream(algorithm_seed: u64, agent: usize) -> StreamRng {
    substream(algorithm_seed, Purpose::ArmDraws, &[agent as u64])
}

/// Algorithm seed used by repetition `rep` of an experiment seeded with `master`.
pub fn repetition_seed(master: u64, rep: usize) -> u64 {
    derive_seed(master, Purpose::Repetition, &[rep as u64])
}
