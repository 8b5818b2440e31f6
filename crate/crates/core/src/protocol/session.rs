use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::config::{AttackChoice, InitialChoice, MatchingScheme, SessionConfig};
use super::matching::{
    fisher_yates, grouped_matching, random_matching, uniform_matching_cbits, Matching,
};
use super::store::{PairStore, ParticleId, Slot};
use super::transcript::{
    Abort, Announcement, Counts, DetectionEntry, Party, SessionPhase, SessionTranscript, TOOL_NAME,
    TOOL_VERSION,
};
use crate::adversary::{load_attack, Channel};
use crate::error::{Error, Result};
use crate::quantum::{encode_key, BellLabel};
use crate::rng::{Phase, SeedTree};
use crate::swapping::expected_partner;

/// Independent randomness for each stage of a session.
pub struct SessionRngs {
    pub prepare: ChaCha8Rng,
    pub channel: ChaCha8Rng,
    pub detection: ChaCha8Rng,
    pub key: ChaCha8Rng,
    pub nature: ChaCha8Rng,
}

impl SessionRngs {
    pub fn from_seed(seed: u64) -> Self {
        let t = SeedTree::new(seed);
        SessionRngs {
            prepare: t.stream(Phase::Prepare),
            channel: t.stream(Phase::Channel),
            detection: t.stream(Phase::Detection),
            key: t.stream(Phase::Key),
            nature: t.stream(Phase::Nature),
        }
    }
}

pub fn choose_initials(n: usize, choice: InitialChoice, rng: &mut impl Rng) -> Vec<BellLabel> {
    match choice {
        InitialChoice::All(l) => vec![l; n],
        InitialChoice::Random => (0..n)
            .map(|_| BellLabel::ALL[rng.random_range(0..4)])
            .collect(),
    }
}

/// Outcome of the detection step.
#[derive(Debug, Clone)]
pub enum Detection {
    Completed(DetectionReport),
    /// Fewer than two particles would be selected.
    Insufficient {
        selected: usize,
    },
}

#[derive(Debug, Clone)]
pub struct DetectionReport {
    pub matching: Matching,
    pub bob_results: Vec<BellLabel>,
    /// Alice's own outcomes on the same pairs.
    pub alice_results: Vec<BellLabel>,
    /// `matches[k]`: Bob's result equals the partner of Alice's.
    pub matches: Vec<bool>,
    pub error_rate: f64,
}

impl DetectionReport {
    pub fn mismatches(&self) -> usize {
        self.matches.iter().filter(|m| !**m).count()
    }
}

fn bob(seq: usize) -> ParticleId {
    ParticleId::new(seq, Slot::Bob)
}

fn alice(seq: usize) -> ParticleId {
    ParticleId::new(seq, Slot::Alice)
}

/// Alice's prediction of Bob's outcome on `(m, n)` from her own outcome.
fn predicted_bob(store: &PairStore, m: usize, n: usize, x: BellLabel) -> Result<BellLabel> {
    Ok(expected_partner(
        store.record(m)?.initial,
        store.record(n)?.initial,
        x,
    ))
}

/// Step 2. Bob selects `⌊fraction · n⌋` particles (rounded down to even),
/// groups them at random, Bell-measures and announces; Alice measures the
/// same pairs and compares against the swap correlations of the recorded
/// initial states.
pub fn detection_round(
    store: &mut PairStore,
    fraction: f64,
    select_rng: &mut impl Rng,
    nature: &mut impl Rng,
) -> Result<Detection> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::arg(format!(
            "detection fraction {fraction} outside (0, 1)"
        )));
    }
    let available: Vec<usize> = store
        .records()
        .iter()
        .filter(|r| !r.bob_consumed && !r.alice_consumed)
        .map(|r| r.seq)
        .collect();
    let mut k = (fraction * available.len() as f64).floor() as usize;
    k -= k % 2;
    if k < 2 {
        return Ok(Detection::Insufficient { selected: k });
    }
    let mut order = available;
    fisher_yates(&mut order, select_rng);
    order.truncate(k);
    let matching = random_matching(&order, select_rng)?;

    let bob_results = matching
        .pairs
        .iter()
        .map(|&(m, n)| store.bell_measure(bob(m), bob(n), nature))
        .collect::<Result<Vec<_>>>()?;
    let mut alice_results = Vec::with_capacity(matching.len());
    let mut matches = Vec::with_capacity(matching.len());
    for (&(m, n), &y) in matching.pairs.iter().zip(&bob_results) {
        let x = store.bell_measure(alice(m), alice(n), nature)?;
        alice_results.push(x);
        matches.push(predicted_bob(store, m, n, x)? == y);
    }
    let error_rate = matches.iter().filter(|m| !**m).count() as f64 / matches.len() as f64;
    Ok(Detection::Completed(DetectionReport {
        matching,
        bob_results,
        alice_results,
        matches,
        error_rate,
    }))
}

#[derive(Debug, Clone)]
pub struct KeyReport {
    pub matching: Matching,
    pub choice_bits: Option<Vec<u8>>,
    /// Bob's outcomes; both parties keep this symbol stream.
    pub bob_symbols: Vec<BellLabel>,
    /// Alice's prediction of Bob's outcomes from her own.
    pub alice_symbols: Vec<BellLabel>,
    /// Intercept-and-resend reconstruction of Bob's outcomes.
    pub eve_symbols: Option<Vec<BellLabel>>,
    pub cbits: u64,
}

impl KeyReport {
    pub fn alice_key(&self) -> String {
        encode_key(&self.alice_symbols)
    }

    pub fn bob_key(&self) -> String {
        encode_key(&self.bob_symbols)
    }

    pub fn eve_key(&self) -> Option<String> {
        self.eve_symbols.as_deref().map(encode_key)
    }

    pub fn symbol_errors(&self) -> usize {
        self.alice_symbols
            .iter()
            .zip(&self.bob_symbols)
            .filter(|(a, b)| a != b)
            .count()
    }
}

/// Step 3. Bob groups every unmeasured particle, measures, and announces the
/// grouping only; Alice measures the same pairs and maps her outcomes
/// through the swap correlations so both hold Bob's symbols. Returns `None`
/// when fewer than two pairs remain.
pub fn extract_key(
    store: &mut PairStore,
    scheme: MatchingScheme,
    key_rng: &mut impl Rng,
    nature: &mut impl Rng,
    eve_reconstructs: bool,
) -> Result<Option<KeyReport>> {
    let remaining: Vec<usize> = store
        .records()
        .iter()
        .filter(|r| !r.bob_consumed && !r.alice_consumed)
        .map(|r| r.seq)
        .collect();
    if remaining.len() < 2 {
        return Ok(None);
    }
    let (matching, choice_bits, cbits) = match scheme {
        MatchingScheme::Uniform => {
            let m = random_matching(&remaining, key_rng)?;
            let cbits = uniform_matching_cbits(2 * m.len());
            (m, None, cbits)
        }
        MatchingScheme::Grouped => {
            let (m, bits) = grouped_matching(&remaining, key_rng)?;
            let cbits = bits.len() as u64;
            (m, Some(bits), cbits)
        }
    };
    let bob_symbols = matching
        .pairs
        .iter()
        .map(|&(m, n)| store.bell_measure(bob(m), bob(n), nature))
        .collect::<Result<Vec<_>>>()?;
    let eve_symbols = if eve_reconstructs {
        let mut out = Vec::with_capacity(matching.len());
        for &(m, n) in &matching.pairs {
            let z = store.bell_measure(
                ParticleId::new(m, Slot::EvePartner),
                ParticleId::new(n, Slot::EvePartner),
                nature,
            )?;
            out.push(expected_partner(BellLabel::PhiPlus, BellLabel::PhiPlus, z));
        }
        Some(out)
    } else {
        None
    };
    let mut alice_symbols = Vec::with_capacity(matching.len());
    for &(m, n) in &matching.pairs {
        let x = store.bell_measure(alice(m), alice(n), nature)?;
        alice_symbols.push(predicted_bob(store, m, n, x)?);
    }
    Ok(Some(KeyReport {
        matching,
        choice_bits,
        bob_symbols,
        alice_symbols,
        eve_symbols,
        cbits,
    }))
}

/// Key bits per transmitted qubit and classical bit.
pub fn cabello_efficiency(key_bits: u64, qubits: u64, cbits: u64) -> Result<f64> {
    let denom = qubits + cbits;
    if denom == 0 {
        return Err(Error::arg("no qubits or classical bits transmitted"));
    }
    Ok(key_bits as f64 / denom as f64)
}

/// Resolves the configured attack and runs the session.
pub fn run_session(config: &SessionConfig) -> Result<SessionTranscript> {
    let channel = match &config.attack {
        AttackChoice::None => Channel::Clean,
        AttackChoice::InterceptResend => Channel::InterceptResend,
        AttackChoice::Ancilla(path) => Channel::Ancilla(load_attack(std::path::Path::new(path))?),
    };
    run_session_with(config, &channel)
}

/// Runs all three protocol steps over `channel`. An abort is a normal
/// outcome recorded in the transcript.
pub fn run_session_with(config: &SessionConfig, channel: &Channel) -> Result<SessionTranscript> {
    config.validate()?;
    let mut rngs = SessionRngs::from_seed(config.seed);
    let initials = choose_initials(config.pairs, config.initial, &mut rngs.prepare);
    let mut store = PairStore::new(&initials)?;
    channel.transmit(&mut store, &mut rngs.channel)?;

    let mut t = SessionTranscript {
        tool: TOOL_NAME.to_string(),
        version: TOOL_VERSION.to_string(),
        config: config.clone(),
        seed: config.seed,
        initial_states: initials,
        announcements: Vec::new(),
        alice_key: String::new(),
        bob_key: String::new(),
        eve_key: None,
        detection_error_rate: None,
        key_error_rate: None,
        counts: Counts {
            qubits_transmitted: config.pairs as u64,
            ..Counts::default()
        },
        efficiency: None,
        aborted: false,
        abort: None,
        warnings: Vec::new(),
    };

    if config.detect_fraction > 0.0 {
        match detection_round(
            &mut store,
            config.detect_fraction,
            &mut rngs.detection,
            &mut rngs.nature,
        )? {
            Detection::Insufficient { selected } => {
                t.aborted = true;
                t.abort = Some(Abort {
                    phase: SessionPhase::Detection,
                    reason: format!(
                        "only {selected} detection particles selected; at least 2 required"
                    ),
                });
                return Ok(t);
            }
            Detection::Completed(report) => {
                t.counts.detection_qubits = 2 * report.matching.len() as u64;
                t.announcements.push(Announcement::DetectionResults {
                    from: Party::Bob,
                    pairs: report
                        .matching
                        .pairs
                        .iter()
                        .zip(&report.bob_results)
                        .map(|(&(m, n), &result)| DetectionEntry { m, n, result })
                        .collect(),
                });
                let proceed = report.error_rate <= config.abort_threshold;
                t.announcements.push(Announcement::DetectionVerdict {
                    from: Party::Alice,
                    compared: report.matches.len(),
                    mismatches: report.mismatches(),
                    error_rate: report.error_rate,
                    proceed,
                });
                t.detection_error_rate = Some(report.error_rate);
                if !proceed {
                    t.aborted = true;
                    t.abort = Some(Abort {
                        phase: SessionPhase::Detection,
                        reason: format!(
                            "detection error rate {} exceeds threshold {}",
                            report.error_rate, config.abort_threshold
                        ),
                    });
                    return Ok(t);
                }
            }
        }
    }

    let eve = matches!(channel, Channel::InterceptResend);
    match extract_key(
        &mut store,
        config.matching,
        &mut rngs.key,
        &mut rngs.nature,
        eve,
    )? {
        None => t
            .warnings
            .push("fewer than 2 particles left for the key phase; key is empty".to_string()),
        Some(key) => {
            t.announcements.push(Announcement::KeyMatching {
                from: Party::Bob,
                scheme: config.matching.to_string(),
                pairs: key.matching.pairs.clone(),
                choice_bits: key.choice_bits.clone(),
                leftover: key.matching.leftover,
            });
            t.alice_key = key.alice_key();
            t.bob_key = key.bob_key();
            t.eve_key = key.eve_key();
            t.key_error_rate = Some(key.symbol_errors() as f64 / key.matching.len() as f64);
            t.counts.discarded_qubits = key.matching.leftover.map_or(0, |_| 1);
            t.counts.cbits_transmitted = key.cbits;
            t.counts.key_bits = 2 * key.matching.len() as u64;
        }
    }
    let key_phase_qubits = t.counts.qubits_transmitted - t.counts.detection_qubits;
    t.efficiency = cabello_efficiency(
        t.counts.key_bits,
        key_phase_qubits,
        t.counts.cbits_transmitted,
    )
    .ok();
    Ok(t)
}
