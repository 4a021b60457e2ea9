//! Deterministic seed derivation.
//!
//! Every random quantity in the crate is drawn from a ChaCha12 stream whose
//! seed is derived from one master seed through a tree of string/index tags:
//!
//! ```text
//! master ── "traj", i        per-trajectory integrator streams
//!        ── "cv", rep        fold partitions of one CV repetition
//!        ── "greedy", n      subset sampler for dictionary size n
//!        ── "noise-dict", j  composition of the j-th random dictionary
//!        ── "noise-eta", j   per-bin noise draws for the j-th dictionary
//! ```
//!
//! Derivation uses FNV-1a over the tag bytes followed by the SplitMix64
//! finalizer, so parallel and serial executions see identical streams on any
//! platform.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Generator name recorded in trajectory headers.
pub const GENERATOR_TAG: &str = "chacha12";

const FNV_OFFSET: u64 = 0xcbf29ce484222325;
const FNV_PRIME: u64 = 0x00000100000001b3;

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// SplitMix64 finalizer; bijective on u64.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Derive a child seed from `seed` and a string tag.
pub fn derive(seed: u64, tag: &str) -> u64 {
    mix(seed ^ fnv1a(tag.as_bytes()))
}

/// Derive a child seed from `seed`, a string tag and an index.
pub fn derive_idx(seed: u64, tag: &str, idx: u64) -> u64 {
    mix(derive(seed, tag) ^ mix(idx))
}

/// Seeded generator for a derived stream.
pub fn rng_from(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}
