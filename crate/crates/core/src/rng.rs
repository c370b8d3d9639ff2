//! Seed derivation.
//!
//! Every random quantity in the crate is drawn from a ChaCha8 stream whose key
//! is derived from a master seed and a short path of integer tags (a purpose
//! tag, then indices such as a row block or a replication number). Streams for
//! different paths are independent for all practical purposes, so work can be
//! split across threads without the output depending on the schedule.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Purpose tags used as the first element of a derivation path.
pub mod tag {
    pub const WEIGHTS: u64 = 0x01;
    pub const GRAPH: u64 = 0x02;
    pub const REFERENCE_ROWS: u64 = 0x03;
    pub const FAST_ROWS: u64 = 0x04;
    pub const CAPACITY_MATRIX: u64 = 0x05;
    pub const ORDER_KEYS: u64 = 0x06;
    pub const EXPLORE: u64 = 0x07;
    pub const SEQUENTIAL: u64 = 0x08;
    pub const CLOCK: u64 = 0x09;
    pub const MEAN_CURVE: u64 = 0x0a;
    pub const REPLICATION: u64 = 0x0b;
    pub const REGIME: u64 = 0x0c;
    pub const DRIFT: u64 = 0x0d;
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a 64-bit child seed from `seed` and a tag path.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    let mut state = splitmix64(seed);
    for &t in path {
        state = splitmix64(state ^ splitmix64(t.wrapping_mul(GOLDEN) ^ 0x5851_f42d_4c95_7f2d));
    }
    state
}

/// Returns the ChaCha8 stream keyed by `(seed, path)`.
pub fn substream(seed: u64, path: &[u64]) -> ChaCha8Rng {
    let mut s = derive_seed(seed, path);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        s = splitmix64(s);
        chunk.copy_from_slice(&s.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Uniform draw in (0, 1], safe to take a logarithm of.
#[inline]
pub(crate) fn open_unit<R: rand::Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}
