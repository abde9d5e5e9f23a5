//! `hunl` — the benchmark platform's command line: serve the session API,
//! run and resume matches, render reports and leaderboards, solve the
//! benchmark games, and draw range charts.
//!
//! Exit codes: 0 success, 2 validation (bad arguments, config, or a request
//! the service rejected), 3 transport (cannot reach the service), 4
//! evaluation (metric computation failed), 1 anything else.

mod agentspec;
mod commands;
mod config;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hunl_client::ClientError;
use hunl_core::protocol::TransportError;
use hunl_core::rangeviz::RangeError;

#[derive(Parser)]
#[command(name = "hunl", version, about = "Heads-up no-limit hold'em benchmark platform")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Start the HTTP session service.
    Serve(ServeArgs),
    /// Run a match (config file and/or flags) and write its report.
    Run(RunArgs),
    /// Resume an interrupted match from its output directory.
    Resume(ResumeArgs),
    /// Render the report of an existing session.
    Report(ReportArgs),
    /// Fetch the leaderboard, print it, and optionally persist it.
    LeaderboardSync(LeaderboardSyncArgs),
    /// Solve a benchmark game or train the house strategy.
    Solve(SolveArgs),
    /// Extract a 13×13 range matrix at a fixed decision node and render it.
    Range(RangeArgs),
}

#[derive(Args)]
struct ServeArgs {
    /// Listen address; port 0 picks a free port (printed on startup).
    #[arg(long, default_value = "127.0.0.1:8080")]
    listen: String,
    /// Directory for session state and cached models.
    #[arg(long)]
    data_dir: PathBuf,
    /// Pre-trained house checkpoint (see `hunl solve house`).
    #[arg(long)]
    house_checkpoint: Option<PathBuf>,
    /// Per-decision time budget in milliseconds; on expiry the service
    /// checks when possible, folds otherwise, and flags the hand.
    #[arg(long)]
    decision_timeout_ms: Option<u64>,
    /// Require this bearer token on every request (default: $HUNL_AUTH_TOKEN).
    #[arg(long)]
    auth_token: Option<String>,
    /// Small blind in chips.
    #[arg(long, default_value_t = 50)]
    sb: u32,
    /// Big blind in chips.
    #[arg(long, default_value_t = 100)]
    bb: u32,
    /// Starting stack in chips.
    #[arg(long, default_value_t = 20_000)]
    stack: u32,
}

#[derive(Args)]
struct RunArgs {
    /// TOML match config; flags below override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Agent spec: a baseline name (check-call, always-fold, all-in,
    /// uniform-random), "scripted:SB=..;BB=..", "house:<checkpoint>", or
    /// "llm[:<name>]" (configured via LLM_* environment variables).
    #[arg(long)]
    agent: Option<String>,
    /// Opponent spec, resolved by the service ("house", a baseline name, or
    /// "scripted:..").
    #[arg(long)]
    opponent: Option<String>,
    /// Hands to play.
    #[arg(long)]
    hands: Option<u64>,
    /// Match seed; omit to let the service choose one.
    #[arg(long)]
    seed: Option<u64>,
    /// Service endpoint; omit to run the service in-process.
    #[arg(long)]
    endpoint: Option<String>,
    /// Bearer token for --endpoint (default: $HUNL_AUTH_TOKEN).
    #[arg(long)]
    auth_token: Option<String>,
    /// In-process service state directory (default: <out>/service).
    #[arg(long)]
    data_dir: Option<PathBuf>,
    /// Output directory for match artifacts (default: hunl-out).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-decision timeout for the in-process service, in milliseconds.
    #[arg(long)]
    decision_timeout_ms: Option<u64>,
    /// House checkpoint for the in-process service's "house" opponent.
    #[arg(long)]
    house_checkpoint: Option<PathBuf>,
}

#[derive(Args)]
struct ResumeArgs {
    /// Output directory of the interrupted `hunl run`.
    #[arg(long)]
    out: PathBuf,
    /// Bearer token override (default: the snapshot's endpoint with
    /// $HUNL_AUTH_TOKEN).
    #[arg(long)]
    auth_token: Option<String>,
}

#[derive(Args)]
struct ReportArgs {
    /// Session id, as printed by `hunl run`.
    #[arg(long)]
    session: String,
    /// Service endpoint holding the session.
    #[arg(long)]
    endpoint: Option<String>,
    /// Bearer token for --endpoint (default: $HUNL_AUTH_TOKEN).
    #[arg(long)]
    auth_token: Option<String>,
    /// Local service state directory holding the session.
    #[arg(long)]
    data_dir: Option<PathBuf>,
    /// House checkpoint, when the local sessions used a custom one.
    #[arg(long)]
    house_checkpoint: Option<PathBuf>,
    /// Row label for the rendered table (default: the session id).
    #[arg(long)]
    label: Option<String>,
    /// Print the raw report as JSON instead of a table.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct LeaderboardSyncArgs {
    /// Service endpoint to fetch from.
    #[arg(long)]
    endpoint: Option<String>,
    /// Bearer token for --endpoint (default: $HUNL_AUTH_TOKEN).
    #[arg(long)]
    auth_token: Option<String>,
    /// Local service state directory to compute from.
    #[arg(long)]
    data_dir: Option<PathBuf>,
    /// House checkpoint, when the local sessions used a custom one.
    #[arg(long)]
    house_checkpoint: Option<PathBuf>,
    /// Write the standings as JSON to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(subcommand)]
    game: SolveCommand,
}

#[derive(Subcommand)]
enum SolveCommand {
    /// Solve Kuhn poker with vanilla CFR and report exploitability.
    Kuhn {
        #[arg(long, default_value_t = 100_000)]
        iterations: u64,
        /// Dump the average strategy, one infoset per line.
        #[arg(long)]
        print_strategy: bool,
    },
    /// Solve Leduc hold'em with vanilla CFR and report exploitability.
    Leduc {
        #[arg(long, default_value_t = 200_000)]
        iterations: u64,
        #[arg(long)]
        print_strategy: bool,
    },
    /// Train the house opponent and save its checkpoint.
    House {
        /// Checkpoint path to write (JSON).
        #[arg(long)]
        out: PathBuf,
        /// External-sampling MCCFR iterations.
        #[arg(long)]
        iterations: Option<u64>,
        /// Preflop scenarios sampled for the abstraction.
        #[arg(long)]
        scenarios: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Scenarios used for the post-training exploitability estimate.
        #[arg(long, default_value_t = 200)]
        eval_scenarios: usize,
    },
}

#[derive(Args)]
struct RangeArgs {
    /// Strategy-queryable agent spec: a baseline name or "house:<checkpoint>".
    #[arg(long)]
    agent: String,
    /// Decision node: "sb-open" or "bb-defend[:<open-to-chips>]". When the
    /// size is omitted, the house checkpoint's most frequent open is used.
    #[arg(long)]
    node: String,
    /// Output file.
    #[arg(long)]
    out: PathBuf,
    /// "png" or "text".
    #[arg(long, default_value = "png")]
    format: String,
    /// House checkpoint used to resolve an omitted bb-defend size.
    #[arg(long)]
    house_checkpoint: Option<PathBuf>,
}

/// A command failure, classified for the exit code.
#[derive(Debug)]
pub enum Failure {
    Validation(String),
    Transport(String),
    Evaluation(String),
    Internal(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 2,
            Failure::Transport(_) => 3,
            Failure::Evaluation(_) => 4,
            Failure::Internal(_) => 1,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Validation(m) => write!(f, "{m}"),
            Failure::Transport(m) => write!(f, "transport: {m}"),
            Failure::Evaluation(m) => write!(f, "evaluation: {m}"),
            Failure::Internal(m) => write!(f, "{m}"),
        }
    }
}

impl From<TransportError> for Failure {
    fn from(err: TransportError) -> Failure {
        match err {
            TransportError::Transport(m) => Failure::Transport(m),
            TransportError::Service { status, body } if status >= 500 => {
                Failure::Evaluation(format!("{status} {}: {}", body.error, body.detail))
            }
            TransportError::Service { status, body } => {
                Failure::Validation(format!("{status} {}: {}", body.error, body.detail))
            }
            TransportError::Protocol(e) => Failure::Validation(e.to_string()),
        }
    }
}

impl From<ClientError> for Failure {
    fn from(err: ClientError) -> Failure {
        match err {
            ClientError::Transport(t) => t.into(),
            ClientError::InvalidReply(m) | ClientError::Completion(m) => Failure::Validation(m),
            ClientError::Stalled(m) => Failure::Internal(m),
            ClientError::Io(e) => Failure::Internal(e.to_string()),
        }
    }
}

impl From<hunl_service::ServiceError> for Failure {
    fn from(err: hunl_service::ServiceError) -> Failure {
        if err.status() >= 500 {
            Failure::Internal(err.to_string())
        } else {
            Failure::Validation(err.to_string())
        }
    }
}

impl From<RangeError> for Failure {
    fn from(err: RangeError) -> Failure {
        Failure::Validation(err.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(err: std::io::Error) -> Failure {
        Failure::Internal(err.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Serve(args) => commands::serve(args),
        Command::Run(args) => commands::run(args),
        Command::Resume(args) => commands::resume(args),
        Command::Report(args) => commands::report(args),
        Command::LeaderboardSync(args) => commands::leaderboard_sync(args),
        Command::Solve(args) => commands::solve(args),
        Command::Range(args) => commands::range(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.exit_code())
        }
    }
}
