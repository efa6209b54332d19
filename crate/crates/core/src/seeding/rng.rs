//! Seedable random stream plus the deterministic seed-splitting scheme.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub const GENERATOR_NAME: &str = "ChaCha8Rng";

/// ChaCha8 stream that remembers the seed it was built from.
#[derive(Debug, Clone)]
pub struct SeedRng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl SeedRng {
    pub fn new(seed: u64) -> Self {
        SeedRng {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn provenance(&self) -> RngProvenance {
        RngProvenance {
            generator: GENERATOR_NAME.to_string(),
            seed: self.seed,
        }
    }
}

impl RngCore for SeedRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngProvenance {
    pub generator: String,
    pub seed: u64,
}

/// Human-readable description of [`derive_seed`], embedded in reports.
pub const SEED_SCHEME: &str = "sub_seed = splitmix64(fnv1a64(le_bytes(parent_seed) || for each part: le_bytes(len(part) as u64) || part)); \
cell seed = sub_seed(master_seed, [dataset_name, method_id]); relaunch seed = sub_seed(cell_seed, [\"relaunch\", le_bytes(index as u64)])";

/// Derives a child seed from a parent seed and a tuple of byte strings.
///
/// FNV-1a over the length-prefixed parts, finished with the SplitMix64 mixer.
/// Stable across platforms and toolchains.
pub fn derive_seed(parent: u64, parts: &[&[u8]]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = OFFSET;
    let mut feed = |bytes: &[u8]| {
        for &b in bytes {
            h ^= u64::from(b);
            h = h.wrapping_mul(PRIME);
        }
    };
    feed(&parent.to_le_bytes());
    for part in parts {
        feed(&(part.len() as u64).to_le_bytes());
        feed(part);
    }
    splitmix64(h)
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn relaunch_seed(base: u64, index: usize) -> u64 {
    derive_seed(base, &[b"relaunch", &(index as u64).to_le_bytes()])
}
