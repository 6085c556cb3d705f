//! Command-line surface over the motioncomm library.
//!
//! Exit codes are part of the contract: 0 success, 2 usage or file-format
//! problems, 3 capacity violations, 4 solver failures, 5 failed
//! verification.

mod analyze;
mod encode;
mod envelope;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use envelope::{Mode, SeparationMetric};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Parse(String),
    Io(String),
    Capacity(String),
    Solver(String),
    VerifyFailed(Vec<String>),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Parse(_) | CliError::Io(_) => 2,
            CliError::Capacity(_) => 3,
            CliError::Solver(_) => 4,
            CliError::VerifyFailed(_) => 5,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Parse(m) => write!(f, "parse error: {m}"),
            CliError::Io(m) => write!(f, "io error: {m}"),
            CliError::Capacity(m) => write!(f, "capacity error: {m}"),
            CliError::Solver(m) => write!(f, "solver failure: {m}"),
            CliError::VerifyFailed(failures) => {
                writeln!(f, "verification failed ({} checks):", failures.len())?;
                for failure in failures {
                    writeln!(f, "  - {failure}")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Parser)]
#[command(
    name = "motioncomm",
    version,
    about = "Step-sequence complexity metrics and minimum-energy message-encoding solvers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute complexity metrics over a corpus and correlate them with
    /// judge scores; writes report.json and scatter.csv.
    Analyze(AnalyzeArgs),
    /// Solve one message-encoding problem and write a result envelope.
    Encode(EncodeArgs),
    /// Re-derive every residual of an envelope and check it.
    Verify(VerifyArgs),
}

#[derive(Args)]
pub struct AnalyzeArgs {
    /// Corpus file: one routine per line, optional "name:" prefix, #-comments.
    pub corpus: Option<PathBuf>,
    /// Use the bundled ten-routine corpus (and its scores, unless --scores).
    #[arg(long)]
    pub bundled: bool,
    /// Scores CSV with header dance,mean_score,std,energy_cm.
    #[arg(long)]
    pub scores: Option<PathBuf>,
    /// Output directory for report.json and scatter.csv.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Weight of the averaged-phrase metric in the combined metric.
    #[arg(long, default_value_t = 0.9)]
    pub w_avg: f64,
    /// Weight of the number-of-phrases metric in the combined metric.
    #[arg(long, default_value_t = 0.1)]
    pub w_num: f64,
}

#[derive(Args)]
pub struct EncodeArgs {
    /// Problem family to solve.
    #[arg(long, value_enum)]
    pub mode: Mode,
    /// Integrator order n (integrator mode).
    #[arg(long = "n")]
    pub order: Option<usize>,
    /// Polynomial control degree N (integrator mode).
    #[arg(long)]
    pub degree: Option<usize>,
    /// Number of messages to encode.
    #[arg(long, default_value_t = 1)]
    pub messages: usize,
    /// Required pairwise separation ε.
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    /// Terminal state, comma separated (e.g. "1,0").
    #[arg(long, allow_hyphen_values = true)]
    pub terminal: String,
    /// Identity mode: endpoint-map rows, ';' between rows, ',' within
    /// (e.g. "1,0,0").
    #[arg(long, allow_hyphen_values = true)]
    pub l: Option<String>,
    /// Solver restarts.
    #[arg(long, default_value_t = 32)]
    pub starts: usize,
    /// Solver seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Relative separation tolerance accepted by the solver.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Separation metric reported in the envelope.
    #[arg(long, value_enum, default_value_t = SeparationMetric::RForm)]
    pub separation_metric: SeparationMetric,
    /// Enforce separations as lower bounds instead of equalities.
    #[arg(long)]
    pub inequality: bool,
    /// Run solver restarts on one thread.
    #[arg(long)]
    pub sequential: bool,
    /// Envelope output path.
    #[arg(long, default_value = "envelope.json")]
    pub out: PathBuf,
    /// Also write per-message trajectory CSVs with this path prefix
    /// (integrator mode).
    #[arg(long)]
    pub trajectories: Option<PathBuf>,
    /// json writes the envelope only; csv also writes trajectory CSVs.
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Args)]
pub struct VerifyArgs {
    /// Envelope file written by `encode`.
    pub envelope: PathBuf,
}

fn verify_cmd(args: &VerifyArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.envelope)
        .map_err(|e| CliError::Io(format!("{}: {e}", args.envelope.display())))?;
    let parsed: envelope::ResultEnvelope = serde_json::from_str(&text)
        .map_err(|e| CliError::Parse(format!("{}: {e}", args.envelope.display())))?;
    let failures = envelope::verify(&parsed);
    if failures.is_empty() {
        println!(
            "{}: ok ({} messages, cost {:.12e})",
            args.envelope.display(),
            parsed.request.messages,
            parsed.cost
        );
        Ok(())
    } else {
        Err(CliError::VerifyFailed(failures))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Analyze(args) => analyze::run(args),
        Command::Encode(args) => encode::run(args),
        Command::Verify(args) => verify_cmd(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
