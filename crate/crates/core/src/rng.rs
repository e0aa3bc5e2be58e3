//! Seedable, splittable pseudo-random streams.
//!
//! Every run owns one master seed. Environment, agent and evaluation each
//! draw from their own ChaCha stream so that, for example, enabling
//! evaluation never perturbs the training trajectory.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub type Prng = ChaCha8Rng;

pub fn prng(seed: u64) -> Prng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stream {
    Env = 1,
    Agent = 2,
    Eval = 3,
    Demos = 4,
}

/// Derives a ChaCha stream for `kind` from a master seed.
pub fn stream(seed: u64, kind: Stream) -> Prng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(kind as u64);
    rng
}

/// The three per-run streams consumed by the rollout kernel and evaluators.
#[derive(Debug, Clone)]
pub struct Streams {
    pub env: Prng,
    pub agent: Prng,
    pub eval: Prng,
}

impl Streams {
    pub fn from_seed(seed: u64) -> Self {
        Self {
            env: stream(seed, Stream::Env),
            agent: stream(seed, Stream::Agent),
            eval: stream(seed, Stream::Eval),
        }
    }
}

/// SplitMix64 finaliser; used to derive per-rollout seeds.
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
