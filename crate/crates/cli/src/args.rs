use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "esqkd",
    version,
    about = "Entanglement-swapping QKD simulator and security analyzer"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Repeated entanglement swapping on two Bell pairs; reports the joint outcome histogram.
    EsDemo(EsDemoArgs),
    /// Runs one full protocol session and writes its transcript.
    Session(SessionArgs),
    /// Outcome table, disturbance and eavesdropper information of one attack.
    AttackAnalyze(AttackArgs),
    /// Information-disturbance scan over the partial-swap attack family (CSV).
    BoundScan(ScanArgs),
    /// Key bits per transmitted qubit and classical bit for a simulated session.
    Efficiency(EfficiencyArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Root seed for every random stream.
    #[arg(long)]
    pub seed: Option<u64>,
    /// key=value file applied before the command-line flags.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output file. Defaults to $ESQKD_OUT_DIR/<command>.<ext>, else stdout.
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SessionFlags {
    #[arg(long)]
    pub pairs: Option<usize>,
    /// Fraction of particles spent on detection; 0 skips detection.
    #[arg(long)]
    pub detect_fraction: Option<f64>,
    /// none, intercept-resend or ancilla:<path>
    #[arg(long)]
    pub attack: Option<String>,
    /// Bell label (phi+, phi-, psi+, psi-) or random.
    #[arg(long)]
    pub initial: Option<String>,
    #[arg(long)]
    pub abort_threshold: Option<f64>,
    /// uniform or grouped
    #[arg(long)]
    pub matching: Option<String>,
}

#[derive(Debug, Args)]
pub struct EsDemoArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub trials: Option<u64>,
    /// Bell label shared by both pairs, or random per trial.
    #[arg(long)]
    pub initial: Option<String>,
}

#[derive(Debug, Args)]
pub struct SessionArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub session: SessionFlags,
}

#[derive(Debug, Args)]
pub struct AttackArgs {
    #[command(flatten)]
    pub common: Common,
    /// none, intercept-resend or ancilla:<path>
    #[arg(long)]
    pub attack: Option<String>,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub common: Common,
    /// Number of evenly spaced t values in [0, 1].
    #[arg(long)]
    pub steps: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EfficiencyArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub session: SessionFlags,
    /// Classical bits to charge instead of the ones the session announced.
    #[arg(long)]
    pub cbits: Option<u64>,
}
