//! 32-byte seeds and the deterministic generators derived from them.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct Seed(pub [u8; 32]);

#[derive(Debug, thiserror::Error)]
#[error("seed must be 64 hex characters (got {0:?})")]
pub struct SeedParseError(String);

impl Seed {
    pub fn from_u64(v: u64) -> Seed {
        let mut b = [0u8; 32];
        b[..8].copy_from_slice(&v.to_le_bytes());
        Seed(b)
    }

    /// Child seed for a labelled sub-experiment.
    pub fn derive(&self, tag: &str) -> Seed {
        self.derive_bytes(tag.as_bytes())
    }

    pub fn derive_index(&self, tag: &str, idx: u64) -> Seed {
        let mut buf = tag.as_bytes().to_vec();
        buf.push(0);
        buf.extend_from_slice(&idx.to_be_bytes());
        self.derive_bytes(&buf)
    }

    fn derive_bytes(&self, tag: &[u8]) -> Seed {
        let mut h = Sha256::new();
        h.update(b"pebblemark/seed");
        h.update(self.0);
        h.update((tag.len() as u64).to_be_bytes());
        h.update(tag);
        Seed(h.finalize().into())
    }

    pub fn rng(&self) -> ChaCha20Rng {
        ChaCha20Rng::from_seed(self.0)
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }
}

impl FromStr for Seed {
    type Err = SeedParseError;

    fn from_str(s: &str) -> Result<Seed, SeedParseError> {
        let s = s.trim();
        // short decimal seeds are handy on the command line
        if !s.is_empty() && s.len() < 20 && s.bytes().all(|b| b.is_ascii_digit()) {
            if let Ok(v) = s.parse::<u64>() {
                return Ok(Seed::from_u64(v));
            }
        }
        let bytes = hex::decode(s).map_err(|_| SeedParseError(s.to_string()))?;
        let arr: [u8; 32] = bytes.try_into().map_err(|_| SeedParseError(s.to_string()))?;
        Ok(Seed(arr))
    }
}

impl fmt::Display for Seed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl fmt::Debug for Seed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Seed({})", &self.to_hex()[..16])
    }
}
