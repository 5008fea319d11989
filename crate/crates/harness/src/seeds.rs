//! Per-cell seed derivation.
//!
//! Every random stream of an experiment hangs off a seed hashed from the
//! global seed and the cell's coordinates, so adding or removing a method
//! never perturbs the randomness of any other cell.

use sha2::{Digest, Sha256};

/// First 8 bytes (LE) of `SHA-256(global ‖ 0x1f ‖ part₀ ‖ 0x1f ‖ part₁ …)`.
pub fn derive_seed(global: u64, parts: &[&str]) -> u64 {
    let mut h = Sha256::new();
    h.update(global.to_le_bytes());
    for p in parts {
        h.update([0x1f]);
        h.update(p.as_bytes());
    }
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

/// Canonical text of a fraction for hashing and file names.
pub fn fraction_key(fraction: f64) -> String {
    format!("{fraction}")
}

pub fn baseline_seed(global: u64, dataset: &str) -> u64 {
    derive_seed(global, &[dataset, "baseline"])
}

pub fn data_seed(global: u64, dataset: &str, role: &str) -> u64 {
    derive_seed(global, &[dataset, "data", role])
}

pub fn split_seed(global: u64, dataset: &str, fraction: f64) -> u64 {
    derive_seed(global, &[dataset, &fraction_key(fraction), "split"])
}

pub fn cell_seed(global: u64, dataset: &str, fraction: f64, method: &str) -> u64 {
    derive_seed(global, &[dataset, &fraction_key(fraction), method])
}
