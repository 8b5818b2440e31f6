//! Command-line front end for the `esqkd` simulator.
//!
//! [`run_command`] parses arguments, resolves the configuration (defaults,
//! then an optional `key=value` file, then flags), runs one experiment and
//! returns the process exit status: 0 on success, 1 on a usage or
//! configuration error, 2 when the protocol aborts.

pub mod args;
pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::Parser;

pub use config::{CommandKind, RunConfig};
pub use output::{read_transcript, write_transcript};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_ABORT: i32 = 2;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "ESQKD_OUT_DIR";

/// Process-level inputs other than argv.
#[derive(Debug, Clone, Default)]
pub struct Context {
    pub out_dir: Option<PathBuf>,
}

impl Context {
    pub fn from_env() -> Self {
        Context {
            out_dir: std::env::var_os(OUT_DIR_ENV)
                .filter(|v| !v.is_empty())
                .map(PathBuf::from),
        }
    }
}

/// Runs with the real environment and standard streams.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(
        argv,
        &Context::from_env(),
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    )
}

pub fn run_with<I, T>(argv: I, ctx: &Context, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match args::Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{e}")
            } else {
                write!(out, "{e}")
            };
            return code;
        }
    };
    match execute(&cli.command, ctx, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

fn execute(
    cmd: &args::Command,
    ctx: &Context,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> esqkd_core::Result<i32> {
    let cfg = RunConfig::from_command(cmd)?;
    let outcome = match cfg.command {
        CommandKind::EsDemo => commands::es_demo(&cfg)?,
        CommandKind::Session => commands::session(&cfg)?,
        CommandKind::AttackAnalyze => commands::attack_analyze(&cfg)?,
        CommandKind::BoundScan => commands::bound_scan_cmd(&cfg, err)?,
        CommandKind::Efficiency => commands::efficiency(&cfg)?,
    };
    let stdout_err = |e: std::io::Error| esqkd_core::Error::Io {
        path: PathBuf::from("<stdout>"),
        source: e,
    };
    match output::artifact_path(&cfg, ctx.out_dir.as_deref()) {
        Some(path) => {
            output::write_text(&path, &outcome.artifact)?;
            out.write_all(outcome.summary.as_bytes())
                .map_err(stdout_err)?;
        }
        None if cfg.command == CommandKind::Efficiency && !outcome.aborted => {
            out.write_all(outcome.summary.as_bytes())
                .map_err(stdout_err)?;
        }
        None => out
            .write_all(outcome.artifact.as_bytes())
            .map_err(stdout_err)?,
    }
    if outcome.aborted {
        let _ = write!(err, "{}", outcome.summary);
        return Ok(EXIT_ABORT);
    }
    Ok(EXIT_OK)
}
