//! Deterministic named RNG substreams.
//!
//! All randomness in a run flows from one 64-bit seed. Each consumer derives
//! its own stream from `(seed, tag, indices)`, so simulation output does not
//! depend on scheduling or thread count.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 step; used only to whiten seed material.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

/// A ChaCha stream for `(seed, tag, indices)`.
pub fn substream(seed: u64, tag: &str, indices: &[u64]) -> ChaCha8Rng {
    let mut state = seed ^ fnv1a(tag.as_bytes());
    let mut key = [0u8; 32];
    for chunk in key.chunks_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    // fold the indices into the key
    for (k, &idx) in indices.iter().enumerate() {
        let mut s = idx ^ splitmix64(&mut state) ^ (k as u64).wrapping_mul(0x9e3779b97f4a7c15);
        let h = splitmix64(&mut s).to_le_bytes();
        for (i, b) in h.iter().enumerate() {
            key[(k * 8 + i) % 32] ^= b;
        }
    }
    ChaCha8Rng::from_seed(key)
}
