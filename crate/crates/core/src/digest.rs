//! SHA-256 digests and a length-prefixed multi-part encoding.
//!
//! `digest_parts` prefixes each part with its length so that
//! `("ab", "c")` and `("a", "bc")` hash differently.

use sha2::{Digest as _, Sha256};

/// A 32-byte SHA-256 digest.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Digest32(pub [u8; 32]);

impl Digest32 {
    pub const ZERO: Digest32 = Digest32([0u8; 32]);

    pub fn to_hex(&self) -> String {
        let mut s = String::with_capacity(64);
        for b in self.0 {
            s.push_str(&format!("{b:02x}"));
        }
        s
    }

    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }
}

impl std::fmt::Debug for Digest32 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Digest32({}…)", &self.to_hex()[..12])
    }
}

impl std::fmt::Display for Digest32 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.to_hex())
    }
}

/// SHA-256 of a single byte string.
pub fn digest_bytes(data: &[u8]) -> Digest32 {
    let mut h = Sha256::new();
    h.update(data);
    Digest32(h.finalize().into())
}

/// SHA-256 over parts, each prefixed with its little-endian u64 length.
pub fn digest_parts(parts: &[&[u8]]) -> Digest32 {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    Digest32(h.finalize().into())
}
