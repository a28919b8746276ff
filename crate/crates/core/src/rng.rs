//! Named random sub-streams derived from one top-level seed.
//!
//! Every consumer of randomness (split, init, latent noise, layer noise, ...)
//! draws from its own ChaCha stream so that adding draws in one place never
//! shifts the sequence seen by another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type RunRng = ChaCha8Rng;

pub const SPLIT: &str = "split";
pub const INIT: &str = "init";
pub const NOISE: &str = "noise";
pub const DROPOUT: &str = "dropout";
pub const SHUFFLE: &str = "shuffle";
pub const TARGETS: &str = "targets";
pub const EVAL: &str = "eval";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedStreams {
    seed: u64,
}

impl SeedStreams {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent generator for the stream called `name`.
    pub fn stream(&self, name: &str) -> RunRng {
        rng_for(self.seed, stream_id(name))
    }

    /// Derive a child seed, e.g. for network initialisation.
    pub fn derive_seed(&self, name: &str) -> u64 {
        use rand::Rng;
        self.stream(name).random()
    }
}

/// ChaCha generator on an explicit (seed, stream) pair.
pub fn rng_for(seed: u64, stream: u64) -> RunRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// FNV-1a hash of the stream name.
fn stream_id(name: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}
