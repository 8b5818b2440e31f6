use std::path::{Path, PathBuf};

use esqkd_core::protocol::SessionTranscript;
use esqkd_core::{Error, Result};

use crate::config::RunConfig;

/// Where the primary artifact goes: the configured path, else
/// `<out_dir>/<command>.<ext>`, else nowhere (stdout).
pub fn artifact_path(cfg: &RunConfig, out_dir: Option<&Path>) -> Option<PathBuf> {
    cfg.output.clone().or_else(|| {
        out_dir.map(|d| {
            d.join(format!(
                "{}.{}",
                cfg.command.name(),
                cfg.command.extension()
            ))
        })
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(io)?;
    }
    std::fs::write(path, text).map_err(io)
}

pub fn write_transcript(t: &SessionTranscript, path: &Path) -> Result<()> {
    write_text(path, &t.to_json())
}

pub fn read_transcript(path: &Path) -> Result<SessionTranscript> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    SessionTranscript::from_json(&text)
}
