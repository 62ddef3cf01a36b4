//! Command-line front end for anchored pairwise translation evaluation.
//!
//! Exit codes: 0 when the command (and, for `score`, the protocol) completed,
//! 1 for runtime failures or incomplete/invalid data, 2 for configuration
//! errors (bad config file, bad flags, unreachable required settings).

mod commands;
mod config;
mod inspect;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::ConfigError;

#[derive(Parser)]
#[command(
    name = "anchorbench",
    version,
    about = "Score a translation model against a frozen anchor set with a pairwise LLM judge"
)]
struct Cli {
    /// Print one machine-readable JSON summary line after the command.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Translate every item with the candidate model (resumable).
    Generate {
        /// Run configuration file (TOML).
        #[arg(long)]
        config: PathBuf,
        /// Regenerate items whose stored translation is an empty failure record.
        #[arg(long)]
        retry_failed: bool,
    },
    /// Judge every planned candidate-vs-anchor pair (resumable).
    Judge {
        #[arg(long)]
        config: PathBuf,
    },
    /// Aggregate judgments into win rates and LT scores; write report.json and report.md.
    Score {
        #[arg(long)]
        config: PathBuf,
    },
    /// Re-render the Markdown report from an existing report.json.
    Report {
        /// Path to report.json.
        #[arg(long)]
        report: PathBuf,
        /// Output path (default: the report path with a .md extension).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Summarize judge token usage and cost over a judgment log.
    Cost {
        /// Judgment log (JSONL).
        #[arg(long)]
        log: PathBuf,
        /// Price sheet JSON (defaults to the bundled prices).
        #[arg(long)]
        prices: Option<PathBuf>,
        /// Project the cost of this many judgments (default: the log's own count).
        #[arg(long)]
        project: Option<u64>,
    },
    /// Run a fully simulated evaluation into a fresh directory.
    Simulate {
        /// Output directory (must be empty or absent unless --force).
        #[arg(long)]
        out: PathBuf,
        /// Number of synthetic anchors.
        #[arg(long, default_value_t = 5)]
        anchors: usize,
        /// Item set to simulate over (default: the bundled demo set).
        #[arg(long)]
        items: Option<PathBuf>,
        /// Seed for slot assignment and simulated draws.
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Identifier of the simulated candidate.
        #[arg(long, default_value = "sim-candidate")]
        candidate_id: String,
        /// True strength of the simulated candidate.
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        candidate_theta: f64,
        /// Strength gap between the strongest and weakest anchor.
        #[arg(long, default_value_t = anchorbench::simjudge::DEFAULT_THETA_SPREAD)]
        theta_spread: f64,
        /// Judge noise temperature (>1 softens, <1 sharpens).
        #[arg(long, default_value_t = 1.0)]
        noise: f64,
        /// Additive win-probability bonus for slot A, in [0, 0.5].
        #[arg(long, default_value_t = 0.0)]
        bias: f64,
        /// Also print a table of slot-A win rates across bias settings.
        #[arg(long)]
        bias_sweep: bool,
        /// Replace the output directory if it already exists.
        #[arg(long)]
        force: bool,
    },
    /// Browse a judgment log in a TUI, or print it with --dump.
    Inspect {
        #[arg(long)]
        config: PathBuf,
        /// Judgment log to open (default: the run's own log).
        #[arg(long)]
        log: Option<PathBuf>,
        /// Open the base set's frozen anchor-vs-anchor log instead.
        #[arg(long)]
        frozen: bool,
        /// Only judgments whose item id contains this substring.
        #[arg(long)]
        item: Option<String>,
        /// Only judgments involving a model whose id contains this substring.
        #[arg(long)]
        model: Option<String>,
        /// Only judgments with this verdict: a, b, or refused.
        #[arg(long)]
        verdict: Option<String>,
        /// Only judgments on items in this slice (e.g. en-ja, hard, ja-en-easy).
        #[arg(long)]
        slice: Option<String>,
        /// Print every matching judgment to stdout instead of opening the TUI.
        #[arg(long)]
        dump: bool,
    },
    /// Check a frozen anchor-set directory for integrity.
    ValidateBaseset {
        /// Anchor set directory.
        #[arg(long)]
        baseset: PathBuf,
        /// Item set the anchor set must cover.
        #[arg(long)]
        itemset: PathBuf,
    },
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Generate { config, retry_failed } => {
            commands::generate(&config, retry_failed, cli.json)
        }
        Command::Judge { config } => commands::judge(&config, cli.json),
        Command::Score { config } => commands::score(&config, cli.json),
        Command::Report { report, out } => commands::report(&report, out, cli.json),
        Command::Cost { log, prices, project } => {
            commands::cost(&log, prices.as_deref(), project, cli.json)
        }
        Command::Simulate {
            out,
            anchors,
            items,
            seed,
            candidate_id,
            candidate_theta,
            theta_spread,
            noise,
            bias,
            bias_sweep,
            force,
        } => commands::simulate(
            &commands::SimulateArgs {
                out,
                anchors,
                items,
                seed,
                candidate_id,
                candidate_theta,
                theta_spread,
                noise,
                bias,
                bias_sweep,
                force,
            },
            cli.json,
        ),
        Command::Inspect { config, log, frozen, item, model, verdict, slice, dump } => {
            inspect::inspect(&inspect::InspectArgs {
                config,
                log,
                frozen,
                item,
                model,
                verdict,
                slice,
                dump,
            })
        }
        Command::ValidateBaseset { baseset, itemset } => {
            Ok(commands::validate_baseset(&baseset, &itemset, cli.json))
        }
    }
}

/// Configuration problems exit 2; everything else unexpected exits 1.
fn exit_code_for(error: &anyhow::Error) -> ExitCode {
    for cause in error.chain() {
        if cause.downcast_ref::<ConfigError>().is_some() {
            return ExitCode::from(2);
        }
        if let Some(core) = cause.downcast_ref::<anchorbench::Error>() {
            if matches!(core, anchorbench::Error::Config(_)) {
                return ExitCode::from(2);
            }
        }
    }
    ExitCode::from(1)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(error) => {
            eprintln!("error: {error:#}");
            exit_code_for(&error)
        }
    }
}
