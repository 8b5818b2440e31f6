//! The three-step protocol: preparation, eavesdropping detection by random
//! grouping, and key extraction.

mod config;
mod matching;
mod session;
mod store;
mod transcript;

pub use config::{
    parse_kv_lines, AttackChoice, InitialChoice, MatchingScheme, SessionConfig, SESSION_KEYS,
};
pub use matching::{
    fisher_yates, grouped_matching, random_matching, uniform_matching_cbits, Matching,
};
pub use session::{
    cabello_efficiency, choose_initials, detection_round, extract_key, run_session,
    run_session_with, Detection, DetectionReport, KeyReport, SessionRngs,
};
pub use store::{generate_pairs, PairRecord, PairStore, ParticleId, Slot};
pub use transcript::{
    Abort, Announcement, Counts, DetectionEntry, Party, SessionPhase, SessionTranscript, TOOL_NAME,
    TOOL_VERSION,
};
