//! Reproducible random streams.
//!
//! A stream is identified by `(master_seed, stream_index)`; the same pair
//! always yields the same bytes. Parallel work derives child streams with
//! [`RngStream::substream`], keyed by a purpose tag and a replication index,
//! so results never depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Purpose tags for substream derivation.
pub mod tag {
    pub const ZETA: u64 = 0x7a65_7461;
    pub const Z: u64 = 0x7a;
    pub const Z0: u64 = 0x7a30;
    pub const WISHART: u64 = 0x7769_7368;
    pub const POPULATION: u64 = 0x0070_6f70;
    pub const REPLICATION: u64 = 0x0072_6570;
    pub const DRAW: u64 = 0x6472_6177;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_index: u64,
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

impl RngStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        Self {
            master_seed,
            stream_index,
        }
    }

    /// Child stream for `(purpose, index)`, sharing the master seed.
    pub fn substream(&self, purpose: u64, index: u64) -> RngStream {
        let h = splitmix(self.master_seed ^ splitmix(self.stream_index));
        let h = splitmix(h ^ splitmix(purpose.wrapping_add(0x5851_f42d_4c95_7f2d)));
        let h = splitmix(h ^ index);
        RngStream::new(self.master_seed, h)
    }

    /// Fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_index);
        rng
    }
}
