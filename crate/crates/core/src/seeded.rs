//! Deterministic RNG keyed by (seed, string id).
//!
//! The batch pipeline draws per-image and per-class randomness from a
//! generator keyed by the run seed plus a stable identifier, so results
//! never depend on execution order or thread count.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Builds a generator whose stream depends only on `(seed, key)`.
pub fn keyed_rng(seed: u64, key: &str) -> ChaCha8Rng {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(key.as_bytes());
    ChaCha8Rng::from_seed(hasher.finalize().into())
}
