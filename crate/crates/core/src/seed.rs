//! Keyed seed derivation so that independent units of work (a job, an
//! interaction spec) draw from independent, reproducible streams.

use sha2::{Digest, Sha256};

pub fn derive_seed(base: u64, key: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(base.to_le_bytes());
    h.update(key.as_bytes());
    let digest = h.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}
