//! Stable sub-seed derivation.
//!
//! Every random stream in the crate is keyed by `(seed, label)` so that
//! results do not depend on evaluation order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Deterministic RNG used throughout the crate.
pub type SimRng = ChaCha8Rng;

/// Derives a 64-bit sub-seed from a parent seed and a purpose label.
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update((label.len() as u64).to_le_bytes());
    h.update(label.as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("sha256 digest has 32 bytes"))
}

pub fn rng_from_seed(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// RNG for the stream identified by `(seed, label)`.
pub fn labeled_rng(seed: u64, label: &str) -> SimRng {
    rng_from_seed(derive_seed(seed, label))
}
