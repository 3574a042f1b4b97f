//! Reproducible random streams.
//!
//! Every independent noise source is addressed by a [`StreamKey`]. The key
//! and the master seed are hashed into a 256-bit ChaCha seed, so a stream's
//! draws depend only on `(master_seed, key)` and never on the order in which
//! streams are created or on how work is split across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Master seed of a simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SeedSpec {
    pub master_seed: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64) -> Self {
        Self { master_seed }
    }

    /// Independent generator for one stream.
    pub fn stream(&self, key: StreamKey) -> ChaCha8Rng {
        let words = key.words();
        let mut state = splitmix64(self.master_seed ^ 0x5348_4150_4544_4946);
        for w in words {
            state = splitmix64(state ^ w);
        }
        let mut seed = [0u8; 32];
        for chunk in seed.chunks_exact_mut(8) {
            state = splitmix64(state);
            chunk.copy_from_slice(&state.to_le_bytes());
        }
        ChaCha8Rng::from_seed(seed)
    }
}

impl From<u64> for SeedSpec {
    fn from(seed: u64) -> Self {
        Self::new(seed)
    }
}

/// Address of a noise stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StreamKey {
    /// Scalar path `index` of a batch simulation.
    Path(u64),
    /// Coefficient `(l, m)` of ambient channel `channel`.
    Coefficient { channel: usize, l: usize, m: i64 },
}

impl StreamKey {
    fn words(self) -> [u64; 4] {
        match self {
            StreamKey::Path(i) => [1, i, 0, 0],
            StreamKey::Coefficient { channel, l, m } => [2, channel as u64, l as u64, m as u64],
        }
    }
}

/// SplitMix64 finaliser.
fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
