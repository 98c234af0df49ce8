use rand::RngCore;

use crate::seed;

/// Deterministic pseudo-random payload bytes.
pub fn generate_payload(byte_count: usize, seed: u64) -> Vec<u8> {
    let mut out = vec![0u8; byte_count];
    seed::stream(seed, &[seed::tag("payload")]).fill_bytes(&mut out);
    out
}
