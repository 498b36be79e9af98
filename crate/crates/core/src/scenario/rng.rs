//! Seeded randomness with labelled, independent streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Root of all randomness in a run. Streams derived from the same seed and
/// label are bit-identical across runs and platforms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RandomSource {
    seed: u64,
}

impl RandomSource {
    pub const fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Child source for a sub-task; children with distinct labels are independent.
    pub fn split(&self, label: &str) -> RandomSource {
        RandomSource::new(derive(self.seed, label))
    }

    pub fn split_indexed(&self, label: &str, index: u64) -> RandomSource {
        self.split(&format!("{label}#{index}"))
    }

    /// Concrete generator for this source.
    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    pub fn stream(&self, label: &str) -> ChaCha8Rng {
        self.split(label).rng()
    }
}

fn derive(seed: u64, label: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(label.as_bytes());
    let out = h.finalize();
    u64::from_le_bytes(out[..8].try_into().expect("sha256 output is 32 bytes"))
}
