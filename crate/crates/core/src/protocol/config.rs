use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::BellLabel;

/// Which adversary sits on the quantum channel.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum AttackChoice {
    None,
    InterceptResend,
    /// Ancilla attack loaded from an attack parameter file.
    Ancilla(String),
}

impl fmt::Display for AttackChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttackChoice::None => f.write_str("none"),
            AttackChoice::InterceptResend => f.write_str("intercept-resend"),
            AttackChoice::Ancilla(p) => write!(f, "ancilla:{p}"),
        }
    }
}

impl FromStr for AttackChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "none" => Ok(AttackChoice::None),
            "intercept-resend" => Ok(AttackChoice::InterceptResend),
            other => match other.strip_prefix("ancilla:") {
                Some(path) if !path.is_empty() => Ok(AttackChoice::Ancilla(path.to_string())),
                _ => Err(Error::Parse(format!(
                    "attack `{other}`: expected none, intercept-resend or ancilla:<path>"
                ))),
            },
        }
    }
}

/// Initial Bell state assignment for the pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum InitialChoice {
    All(BellLabel),
    /// Independently uniform per pair.
    Random,
}

impl fmt::Display for InitialChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialChoice::All(l) => write!(f, "{l}"),
            InitialChoice::Random => f.write_str("random"),
        }
    }
}

impl FromStr for InitialChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim() == "random" {
            Ok(InitialChoice::Random)
        } else {
            s.parse().map(InitialChoice::All)
        }
    }
}

/// How Bob groups his key-phase particles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum MatchingScheme {
    /// Uniform random perfect matching over all remaining particles.
    Uniform,
    /// Blocks of four with one announced bit per block.
    Grouped,
}

impl fmt::Display for MatchingScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MatchingScheme::Uniform => "uniform",
            MatchingScheme::Grouped => "grouped",
        })
    }
}

impl FromStr for MatchingScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "uniform" => Ok(MatchingScheme::Uniform),
            "grouped" => Ok(MatchingScheme::Grouped),
            other => Err(Error::Parse(format!(
                "matching `{other}`: expected uniform or grouped"
            ))),
        }
    }
}

macro_rules! string_serde {
    ($($t:ty),*) => {$(
        impl From<$t> for String {
            fn from(v: $t) -> String {
                v.to_string()
            }
        }
        impl TryFrom<String> for $t {
            type Error = Error;
            fn try_from(s: String) -> Result<Self> {
                s.parse()
            }
        }
    )*};
}
string_serde!(AttackChoice, InitialChoice, MatchingScheme);

/// Parameters of one protocol session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub pairs: usize,
    /// Fraction of particles Bob sacrifices for detection. `0` skips the
    /// detection phase entirely.
    pub detect_fraction: f64,
    pub attack: AttackChoice,
    pub seed: u64,
    pub initial: InitialChoice,
    /// Abort when the detection error rate exceeds this value.
    pub abort_threshold: f64,
    pub matching: MatchingScheme,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            pairs: 100,
            detect_fraction: 0.5,
            attack: AttackChoice::None,
            seed: 0,
            initial: InitialChoice::All(BellLabel::PhiPlus),
            abort_threshold: 0.05,
            matching: MatchingScheme::Uniform,
        }
    }
}

pub const SESSION_KEYS: [&str; 7] = [
    "pairs",
    "detect_fraction",
    "attack",
    "seed",
    "initial",
    "abort_threshold",
    "matching",
];

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("{key}: cannot parse `{value}`")))
}

impl SessionConfig {
    /// Sets one field from its textual form. Returns `Ok(false)` when `key`
    /// is not a session key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<bool> {
        match key {
            "pairs" => self.pairs = parse_num(key, value)?,
            "detect_fraction" => self.detect_fraction = parse_num(key, value)?,
            "attack" => self.attack = value.parse()?,
            "seed" => self.seed = parse_num(key, value)?,
            "initial" => self.initial = value.parse()?,
            "abort_threshold" => self.abort_threshold = parse_num(key, value)?,
            "matching" => self.matching = value.parse()?,
            _ => return Ok(false),
        }
        Ok(true)
    }

    pub fn validate(&self) -> Result<()> {
        if self.pairs < 2 {
            return Err(Error::arg(format!(
                "pairs must be at least 2, got {}",
                self.pairs
            )));
        }
        if !(0.0..1.0).contains(&self.detect_fraction) {
            return Err(Error::arg(format!(
                "detect_fraction must lie in [0, 1), got {}",
                self.detect_fraction
            )));
        }
        if !(0.0..=1.0).contains(&self.abort_threshold) {
            return Err(Error::arg(format!(
                "abort_threshold must lie in [0, 1], got {}",
                self.abort_threshold
            )));
        }
        Ok(())
    }

    /// Parses a `key=value` config text on top of the defaults. Every key
    /// must be a session key.
    pub fn from_kv_text(text: &str) -> Result<Self> {
        let mut cfg = SessionConfig::default();
        for (line, key, value) in parse_kv_lines(text)? {
            if !cfg.set(&key, &value)? {
                return Err(Error::Parse(format!("line {line}: unknown key `{key}`")));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_kv_text(&self) -> String {
        format!(
            "pairs={}\ndetect_fraction={}\nattack={}\nseed={}\ninitial={}\nabort_threshold={}\nmatching={}\n",
            self.pairs, self.detect_fraction, self.attack, self.seed, self.initial, self.abort_threshold, self.matching
        )
    }
}

/// Splits `key=value` lines. Blank lines and `#` comments are skipped.
/// Returns `(line number, key, value)` with both sides trimmed.
pub fn parse_kv_lines(text: &str) -> Result<Vec<(usize, String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::Parse(format!("line {}: expected key=value, got `{line}`", i + 1))
        })?;
        let k = k.trim();
        if k.is_empty() {
            return Err(Error::Parse(format!("line {}: empty key", i + 1)));
        }
        out.push((i + 1, k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kv_roundtrip() {
        let cfg = SessionConfig {
            pairs: 12,
            detect_fraction: 0.25,
            attack: AttackChoice::Ancilla("att.json".into()),
            seed: 99,
            initial: InitialChoice::Random,
            abort_threshold: 0.1,
            matching: MatchingScheme::Grouped,
        };
        assert_eq!(SessionConfig::from_kv_text(&cfg.to_kv_text()).unwrap(), cfg);
    }

    #[test]
    fn comments_and_errors() {
        let cfg =
            SessionConfig::from_kv_text("# header\npairs = 10 # ten\n\nattack=intercept-resend\n")
                .unwrap();
        assert_eq!(cfg.pairs, 10);
        assert_eq!(cfg.attack, AttackChoice::InterceptResend);
        assert!(SessionConfig::from_kv_text("pairs").is_err());
        assert!(SessionConfig::from_kv_text("colour=blue").is_err());
        assert!(SessionConfig::from_kv_text("pairs=1").is_err());
        assert!(SessionConfig::from_kv_text("detect_fraction=1.0").is_err());
        assert!(SessionConfig::from_kv_text("attack=ancilla:").is_err());
        assert!(SessionConfig::from_kv_text("initial=bogus").is_err());
    }
}
