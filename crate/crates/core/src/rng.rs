//! Seed derivation and the crate's RNG type.
//!
//! Every stochastic step draws from a [`ChaCha8Rng`] seeded through
//! [`derive_seed`], so results do not depend on thread scheduling or on the
//! platform's hasher.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type BenchRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> BenchRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Stable 64-bit seed from a base seed and an ordered list of string parts.
///
/// Parts are length-prefixed before hashing so `("ab", "c")` and
/// `("a", "bc")` never collide.
pub fn derive_seed(base: u64, parts: &[&str]) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(base.to_le_bytes());
    for part in parts {
        hasher.update((part.len() as u64).to_le_bytes());
        hasher.update(part.as_bytes());
    }
    let digest = hasher.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}
