//! Seeded random streams.
//!
//! Every random task draws from its own ChaCha stream derived from a root seed
//! and a task name, so results do not depend on the order tasks run in.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Stable 64-bit hash of a stream name (FNV-1a, then mixed).
fn name_hash(name: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    splitmix64(h)
}

/// Seed of the named substream of `root`.
pub fn substream_seed(root: u64, name: &str) -> u64 {
    splitmix64(root ^ name_hash(name))
}

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn substream(root: u64, name: &str) -> Rng {
    rng_from_seed(substream_seed(root, name))
}
