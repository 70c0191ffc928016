//! Report envelope emitted by the CLI: the command, digests of the input
//! files, and the findings of the wrapped analysis as structured JSON.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub inputs: Vec<InputDigest>,
    pub findings: serde_json::Value,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl InputDigest {
    pub fn of(path: impl Into<String>, contents: &[u8]) -> Self {
        InputDigest {
            path: path.into(),
            sha256: sha256_hex(contents),
        }
    }
}

impl Report {
    pub fn new(
        command: impl Into<String>,
        inputs: Vec<InputDigest>,
        findings: serde_json::Value,
    ) -> Self {
        Report {
            command: command.into(),
            inputs,
            findings,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}
