use sha2::{Digest, Sha256};

use crate::graph::NodeId;

pub const DEFAULT_WIDTH: usize = 256;

/// The random oracle `H`, instantiated with SHA-256 under a per-oracle seed.
/// Every query is `node-id ∘ payload`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Oracle {
    seed: Vec<u8>,
    width: usize,
}

impl Default for Oracle {
    fn default() -> Oracle {
        Oracle { seed: Vec::new(), width: DEFAULT_WIDTH }
    }
}

impl Oracle {
    /// `width` is in bits: a multiple of 8 between 8 and 256.
    pub fn new(seed: &[u8], width: usize) -> Option<Oracle> {
        (width % 8 == 0 && (8..=DEFAULT_WIDTH).contains(&width)).then(|| Oracle { seed: seed.to_vec(), width })
    }

    pub fn with_seed(seed: &[u8]) -> Oracle {
        Oracle { seed: seed.to_vec(), width: DEFAULT_WIDTH }
    }

    pub fn seed(&self) -> &[u8] {
        &self.seed
    }

    pub fn width_bits(&self) -> usize {
        self.width
    }

    pub fn width_bytes(&self) -> usize {
        self.width / 8
    }

    pub fn query(&self, v: NodeId, payload: &[&[u8]]) -> Vec<u8> {
        let mut h = Sha256::new();
        h.update(b"pebblemark/H");
        h.update((self.seed.len() as u64).to_be_bytes());
        h.update(&self.seed);
        h.update((v as u64).to_be_bytes());
        for p in payload {
            h.update(p);
        }
        let mut out = h.finalize().to_vec();
        out.truncate(self.width_bytes());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_separated() {
        let h = Oracle::default();
        assert_eq!(h.query(3, &[b"x"]), h.query(3, &[b"x"]));
        assert_ne!(h.query(3, &[b"x"]), h.query(4, &[b"x"]));
        assert_ne!(h.query(3, &[b"x"]), Oracle::with_seed(b"s").query(3, &[b"x"]));
        // concatenation is what is hashed, not the split
        assert_eq!(h.query(1, &[b"ab", b"c"]), h.query(1, &[b"a", b"bc"]));
        assert_eq!(h.query(1, &[]).len(), 32);
    }

    #[test]
    fn truncated_width() {
        let h = Oracle::new(b"", 64).unwrap();
        assert_eq!(h.query(1, &[b"x"]), Oracle::default().query(1, &[b"x"])[..8].to_vec());
        assert!(Oracle::new(b"", 12).is_none());
        assert!(Oracle::new(b"", 512).is_none());
    }

    #[test]
    fn bits_look_balanced() {
        let h = Oracle::default();
        let ones: u32 = (0..2000).map(|v| h.query(v, &[b"x"]).iter().map(|b| b.count_ones()).sum::<u32>()).sum();
        let frac = ones as f64 / (2000.0 * 256.0);
        assert!((frac - 0.5).abs() < 0.005, "{frac}");
    }
}
