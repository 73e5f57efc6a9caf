//! Seeded random streams.
//!
//! A single master seed fans out into independent substreams keyed by a
//! stable label, so adding a consumer never perturbs anybody else's draws.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

/// Mixes a master seed with a label into a substream seed.
///
/// FNV-1a over the label bytes followed by a SplitMix64 finalizer. Both are
/// fixed-width integer arithmetic, so the result is identical on every
/// platform.
pub fn derive_seed(master: u64, label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    splitmix64(master ^ h)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn stream(master: u64, label: &str) -> Stream {
    Stream::seed_from_u64(derive_seed(master, label))
}

/// The engine-owned substreams of one episode.
#[derive(Debug, Clone)]
pub struct RngStreams {
    pub spawn: Stream,
    pub collision: Stream,
    pub regrowth: Stream,
    pub termination: Stream,
    pub dynamics: Stream,
}

impl RngStreams {
    pub fn new(master: u64) -> Self {
        RngStreams {
            spawn: stream(master, "spawn"),
            collision: stream(master, "collision"),
            regrowth: stream(master, "regrowth"),
            termination: stream(master, "termination"),
            dynamics: stream(master, "dynamics"),
        }
    }
}
