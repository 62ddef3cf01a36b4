//! Keyed-hash primitives shared by pair construction and the simulated judge.
//!
//! Every "random" decision in the pipeline — which model sits in slot A,
//! which side a simulated judgment picks — is derived from SHA-256 over
//! explicit inputs. Outcomes are therefore independent of iteration order,
//! thread scheduling, and platform, and any single decision can be
//! re-derived in isolation.

use sha2::{Digest, Sha256};

/// Lowercase hex SHA-256 of raw bytes.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        use std::fmt::Write;
        let _ = write!(out, "{b:02x}");
    }
    out
}

/// Lowercase hex SHA-256 of a file's contents.
pub fn sha256_file(path: &std::path::Path) -> crate::Result<String> {
    let bytes = std::fs::read(path).map_err(|e| crate::Error::io(path.display().to_string(), e))?;
    Ok(sha256_hex(&bytes))
}

/// Content hash of a prompt template: SHA-256 of the NFC-normalized UTF-8
/// bytes. Normalization makes the id stable against editors that re-encode
/// combining characters; the text itself is stored as-is.
pub fn prompt_hash(template: &str) -> String {
    use unicode_normalization::UnicodeNormalization;
    let normalized: String = template.nfc().collect();
    sha256_hex(normalized.as_bytes())
}

fn pair_digest(seed: u64, domain: &[u8], item_id: &str, model_a: &str, model_b: &str) -> [u8; 32] {
    // Model order must not matter: feed the lexicographically smaller id first.
    let (lo, hi) = if model_a <= model_b { (model_a, model_b) } else { (model_b, model_a) };
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(domain);
    hasher.update(item_id.as_bytes());
    hasher.update(lo.as_bytes());
    hasher.update(hi.as_bytes());
    hasher.finalize().into()
}

/// Slot assignment for one pair: `true` means the pair's *left* model (the
/// lexicographically smaller id) goes into display slot A. Taken from the
/// low bit of SHA-256(seed_le || item_id || min(a,b) || max(a,b)).
pub fn side_draw_left_is_a(seed: u64, item_id: &str, model_a: &str, model_b: &str) -> bool {
    let digest = pair_digest(seed, b"", item_id, model_a, model_b);
    digest[31] & 1 == 0
}

/// Uniform draw in [0, 1) keyed to (seed, item, pair), domain-separated from
/// the slot assignment so the two decisions are independent. The first 8
/// digest bytes, little-endian, supply 53 uniform mantissa bits.
pub fn unit_draw(seed: u64, item_id: &str, model_a: &str, model_b: &str) -> f64 {
    let digest = pair_digest(seed, b"sim", item_id, model_a, model_b);
    let mut raw = [0u8; 8];
    raw.copy_from_slice(&digest[..8]);
    let bits = u64::from_le_bytes(raw) >> 11;
    bits as f64 * (1.0 / (1u64 << 53) as f64)
}
