//! Named random streams derived from one 64-bit seed.
//!
//! Every probabilistic step draws from its own stream ("rows", "cols",
//! "estimator-g3", ...). A stream is a ChaCha8 generator keyed by the seed
//! with the stream id set from a hash of the name, so streams are
//! independent of each other and of the order in which they are created.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamSplitter {
    seed: u64,
}

// FNV-1a, stable across platforms and releases.
fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl StreamSplitter {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self, name: &str) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(fnv1a(name.as_bytes()));
        rng
    }

    /// A splitter for a sub-task; its streams never collide with the parent's.
    pub fn child(&self, name: &str) -> StreamSplitter {
        StreamSplitter {
            seed: splitmix(self.seed ^ fnv1a(name.as_bytes()).rotate_left(17)),
        }
    }
}
