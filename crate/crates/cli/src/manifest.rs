use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const TOOL: &str = "pebblemark";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Everything needed to replay a run and check it produced the same bytes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentManifest {
    pub tool: String,
    pub version: String,
    /// subcommand path, e.g. `game run`
    pub command: String,
    /// arguments after the program name, always with an explicit `--seed`
    pub argv: Vec<String>,
    pub seed: String,
    /// input path -> SHA-256 of its contents
    pub inputs: BTreeMap<String, String>,
    pub report_sha256: String,
    /// artifact role (`trace`, `graph`, `plot`, ...) -> SHA-256
    pub artifacts: BTreeMap<String, String>,
}

impl ExperimentManifest {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serialises") + "\n"
    }

    pub fn from_json(text: &str) -> Result<ExperimentManifest, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let m = ExperimentManifest {
            tool: TOOL.into(),
            version: VERSION.into(),
            command: "graph build".into(),
            argv: vec!["graph".into(), "build".into()],
            seed: "00".into(),
            inputs: BTreeMap::new(),
            report_sha256: sha256_hex(b""),
            artifacts: [("graph".to_string(), sha256_hex(b"x"))].into(),
        };
        assert_eq!(ExperimentManifest::from_json(&m.to_json()).unwrap(), m);
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
