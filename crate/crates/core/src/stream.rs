//! Keyed derivation of independent random streams.
//!
//! Every random decision in the generator draws from a stream derived from
//! `(master_seed, label, indices...)`. The derivation hashes a length-prefixed
//! encoding of those inputs with SHA-256 and uses the digest as the 256-bit
//! key of a ChaCha8 generator:
//!
//! ```text
//! key = SHA-256( "facesynth/stream/v1"
//!              || u64le(master_seed)
//!              || u64le(len(label)) || label
//!              || u64le(len(indices)) || u64le(index_0) || ... )
//! ```
//!
//! Because each stream depends only on its own key, work items can run in any
//! order on any number of threads and still draw identical values.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// The random stream type used throughout the crate.
pub type RandomStream = ChaCha8Rng;

const DOMAIN: &[u8] = b"facesynth/stream/v1";

/// Derive the stream identified by `label` and `indices` under `master_seed`.
pub fn derive_stream(master_seed: u64, label: &str, indices: &[u64]) -> RandomStream {
    let mut hasher = Sha256::new();
    hasher.update(DOMAIN);
    hasher.update(master_seed.to_le_bytes());
    hasher.update((label.len() as u64).to_le_bytes());
    hasher.update(label.as_bytes());
    hasher.update((indices.len() as u64).to_le_bytes());
    for index in indices {
        hasher.update(index.to_le_bytes());
    }
    let digest = hasher.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest);
    ChaCha8Rng::from_seed(key)
}
