use serde::{Deserialize, Serialize};

use super::config::SessionConfig;
use crate::error::{Error, Result};
use crate::quantum::BellLabel;

pub const TOOL_NAME: &str = "esqkd";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Party {
    Alice,
    Bob,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionPhase {
    Detection,
    Key,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectionEntry {
    pub m: usize,
    pub n: usize,
    pub result: BellLabel,
}

/// Classical messages, in the order they were sent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Announcement {
    /// Bob's detection pairs and his outcome for each.
    DetectionResults {
        from: Party,
        pairs: Vec<DetectionEntry>,
    },
    /// Alice's comparison and the decision to continue.
    DetectionVerdict {
        from: Party,
        compared: usize,
        mismatches: usize,
        error_rate: f64,
        proceed: bool,
    },
    /// Bob's key-phase grouping. Results are never announced.
    KeyMatching {
        from: Party,
        scheme: String,
        pairs: Vec<(usize, usize)>,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        choice_bits: Option<Vec<u8>>,
        leftover: Option<usize>,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    /// Every particle sent from Alice to Bob.
    pub qubits_transmitted: u64,
    /// Particles spent on eavesdropping detection.
    pub detection_qubits: u64,
    /// Key-phase particles left unmatched.
    pub discarded_qubits: u64,
    /// Classical bits spent announcing the key-phase grouping.
    pub cbits_transmitted: u64,
    pub key_bits: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Abort {
    pub phase: SessionPhase,
    pub reason: String,
}

/// Complete record of one session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionTranscript {
    pub tool: String,
    pub version: String,
    pub config: SessionConfig,
    pub seed: u64,
    pub initial_states: Vec<BellLabel>,
    pub announcements: Vec<Announcement>,
    pub alice_key: String,
    pub bob_key: String,
    /// Key reconstructed by an intercept-and-resend adversary.
    pub eve_key: Option<String>,
    pub detection_error_rate: Option<f64>,
    /// Fraction of key symbols (one per swap) on which Alice and Bob differ,
    /// by out-of-band comparison.
    pub key_error_rate: Option<f64>,
    pub counts: Counts,
    /// Key bits per transmitted qubit and classical bit, detection excluded.
    pub efficiency: Option<f64>,
    pub aborted: bool,
    pub abort: Option<Abort>,
    pub warnings: Vec<String>,
}

impl SessionTranscript {
    /// Deterministic pretty-printed JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("transcript is plain data");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("transcript: {e}")))
    }

    /// Checks the structural invariants of a finished transcript.
    pub fn check(&self) -> Result<()> {
        if self.alice_key.len() != self.bob_key.len() {
            return Err(Error::invariant("key lengths differ"));
        }
        if self.seed != self.config.seed {
            return Err(Error::invariant("seed does not match the config echo"));
        }
        let n = self.initial_states.len();
        let mut detection: Vec<usize> = Vec::new();
        let mut key: Vec<usize> = Vec::new();
        for a in &self.announcements {
            match a {
                Announcement::DetectionResults { pairs, .. } => {
                    detection.extend(pairs.iter().flat_map(|e| [e.m, e.n]));
                }
                Announcement::KeyMatching {
                    pairs, leftover, ..
                } => {
                    key.extend(pairs.iter().flat_map(|&(m, n)| [m, n]).chain(*leftover));
                }
                Announcement::DetectionVerdict { .. } => {}
            }
        }
        if let Some(bad) = detection.iter().chain(&key).find(|&&s| s >= n) {
            return Err(Error::invariant(format!(
                "announced sequence number {bad} does not exist"
            )));
        }
        let mut all: Vec<usize> = detection.iter().chain(&key).copied().collect();
        let total = all.len();
        all.sort_unstable();
        all.dedup();
        if all.len() != total {
            return Err(Error::invariant(
                "a particle appears in more than one measurement",
            ));
        }
        Ok(())
    }
}
