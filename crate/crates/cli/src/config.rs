use std::path::{Path, PathBuf};

use esqkd_core::protocol::{parse_kv_lines, InitialChoice, MatchingScheme, SessionConfig};
use esqkd_core::{Error, Result};

use crate::args::{Command, Common, SessionFlags};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    EsDemo,
    Session,
    AttackAnalyze,
    BoundScan,
    Efficiency,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::EsDemo => "es-demo",
            CommandKind::Session => "session",
            CommandKind::AttackAnalyze => "attack-analyze",
            CommandKind::BoundScan => "bound-scan",
            CommandKind::Efficiency => "efficiency",
        }
    }

    /// File extension of the primary artifact.
    pub fn extension(self) -> &'static str {
        match self {
            CommandKind::BoundScan => "csv",
            _ => "json",
        }
    }
}

/// Fully resolved settings for one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: CommandKind,
    pub session: SessionConfig,
    pub trials: u64,
    pub steps: usize,
    pub cbits: Option<u64>,
    pub output: Option<PathBuf>,
}

pub const EXTRA_KEYS: [&str; 4] = ["trials", "steps", "cbits", "output"];

impl RunConfig {
    pub fn defaults(command: CommandKind) -> Self {
        let mut session = SessionConfig::default();
        if command == CommandKind::Efficiency {
            session.pairs = 4;
            session.detect_fraction = 0.0;
            session.matching = MatchingScheme::Grouped;
        }
        RunConfig {
            command,
            session,
            trials: 10_000,
            steps: 11,
            cbits: None,
            output: None,
        }
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if self.session.set(key, value)? {
            return Ok(());
        }
        let num = |v: &str| {
            v.trim()
                .parse::<u64>()
                .map_err(|_| Error::Parse(format!("{key}: cannot parse `{v}`")))
        };
        match key {
            "trials" => self.trials = num(value)?,
            "steps" => self.steps = num(value)? as usize,
            "cbits" => self.cbits = Some(num(value)?),
            "output" => self.output = Some(PathBuf::from(value)),
            _ => return Err(Error::Parse(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        for (line, key, value) in parse_kv_lines(&text)? {
            self.set(&key, &value)
                .map_err(|e| Error::Parse(format!("{}:{line}: {e}", path.display())))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        match self.command {
            CommandKind::EsDemo if self.trials == 0 => {
                Err(Error::Argument("trials must be positive".into()))
            }
            CommandKind::BoundScan if self.steps < 2 => Err(Error::Argument(format!(
                "steps must be at least 2, got {}",
                self.steps
            ))),
            CommandKind::Session | CommandKind::Efficiency => self.session.validate(),
            _ => Ok(()),
        }
    }

    /// Resolves the configuration: defaults, then the config file, then the
    /// flags given on the command line.
    pub fn from_command(cmd: &Command) -> Result<Self> {
        let (kind, common, mut flags) = match cmd {
            Command::EsDemo(a) => {
                let mut f = Vec::new();
                push(&mut f, "trials", a.trials);
                push(&mut f, "initial", a.initial.as_ref());
                (CommandKind::EsDemo, &a.common, f)
            }
            Command::Session(a) => (CommandKind::Session, &a.common, session_flags(&a.session)),
            Command::AttackAnalyze(a) => {
                let mut f = Vec::new();
                push(&mut f, "attack", a.attack.as_ref());
                (CommandKind::AttackAnalyze, &a.common, f)
            }
            Command::BoundScan(a) => {
                let mut f = Vec::new();
                push(&mut f, "steps", a.steps);
                (CommandKind::BoundScan, &a.common, f)
            }
            Command::Efficiency(a) => {
                let mut f = session_flags(&a.session);
                push(&mut f, "cbits", a.cbits);
                (CommandKind::Efficiency, &a.common, f)
            }
        };
        common_flags(common, &mut flags);
        let mut cfg = RunConfig::defaults(kind);
        if let Some(path) = &common.config {
            cfg.apply_file(path)?;
        }
        for (k, v) in flags {
            cfg.set(k, &v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn es_initial(&self) -> InitialChoice {
        self.session.initial
    }
}

fn push(out: &mut Vec<(&'static str, String)>, key: &'static str, v: Option<impl ToString>) {
    if let Some(v) = v {
        out.push((key, v.to_string()));
    }
}

fn session_flags(s: &SessionFlags) -> Vec<(&'static str, String)> {
    let mut f = Vec::new();
    push(&mut f, "pairs", s.pairs);
    push(&mut f, "detect_fraction", s.detect_fraction);
    push(&mut f, "attack", s.attack.as_ref());
    push(&mut f, "initial", s.initial.as_ref());
    push(&mut f, "abort_threshold", s.abort_threshold);
    push(&mut f, "matching", s.matching.as_ref());
    f
}

fn common_flags(c: &Common, f: &mut Vec<(&'static str, String)>) {
    push(f, "seed", c.seed);
    if let Some(p) = &c.output {
        f.push(("output", p.to_string_lossy().into_owned()));
    }
}
