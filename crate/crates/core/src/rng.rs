//! Seeded, splittable randomness.
//!
//! Every stochastic operation in the crate takes an explicit generator drawn
//! from a [`Streams`] tree, so a run is fully determined by its root seed and
//! shot-level work can be farmed out to threads without sharing state.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Named stream identifiers used by the protocol engines.
pub mod stream {
    pub const KEYS: u64 = 1;
    pub const MEASURE: u64 = 2;
    pub const SHUFFLE: u64 = 3;
    pub const TRAPS: u64 = 4;
    pub const SPLIT: u64 = 5;
    pub const ADVERSARY: u64 = 6;
    pub const VERIFIER: u64 = 7;
    pub const CIRCUIT: u64 = 8;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Streams {
    seed: u64,
}

impl Streams {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent generator for stream `id` under this seed.
    pub fn stream(&self, id: u64) -> SimRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(id);
        rng
    }

    /// Child tree, e.g. one per shot or per trial.
    pub fn child(&self, index: u64) -> Streams {
        Streams {
            seed: splitmix64(self.seed ^ splitmix64(index.wrapping_add(0x9e37_79b9_7f4a_7c15))),
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
