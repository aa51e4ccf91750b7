use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const SCHEMA: &str = "advbound-report/1";

/// What every subcommand prints on stdout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub command: String,
    /// Arguments after the program name, verbatim.
    pub argv: Vec<String>,
    /// SHA-256 over the arguments and the bytes of every input file.
    pub inputs_digest: String,
    pub seed: Option<u64>,
    pub version: String,
    pub ok: bool,
    pub results: serde_json::Value,
    pub timing_ms: f64,
}

/// Accumulates the bytes that identify a run.
#[derive(Default)]
pub struct InputDigest(Sha256);

impl InputDigest {
    pub fn new(argv: &[String]) -> Self {
        let mut d = InputDigest(Sha256::new());
        for a in argv {
            d.add(a.as_bytes());
        }
        d
    }

    pub fn add(&mut self, bytes: &[u8]) {
        // length prefix keeps ("ab","c") apart from ("a","bc")
        self.0.update((bytes.len() as u64).to_le_bytes());
        self.0.update(bytes);
    }

    pub fn hex(self) -> String {
        self.0
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}
