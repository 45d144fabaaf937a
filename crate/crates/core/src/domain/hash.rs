use sha2::{Digest, Sha256};

use super::{DomainEvalFn, FnKind};

/// Uniform-looking value in `[0, 1)` derived from `(seed, value)`.
pub(super) fn unit_hash(seed: u64, value: &str) -> f64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(value.as_bytes());
    let digest = h.finalize();
    let mut word = [0u8; 8];
    word.copy_from_slice(&digest[..8]);
    (u64::from_le_bytes(word) >> 11) as f64 / (1u64 << 53) as f64
}

/// An adversarial domain function that maps values to pseudo-random
/// distances; it corresponds to no meaningful domain.
pub fn make_random_hash_fn(seed: u64) -> DomainEvalFn {
    DomainEvalFn::new(format!("hash:{seed}"), FnKind::RandomHash { seed })
}
