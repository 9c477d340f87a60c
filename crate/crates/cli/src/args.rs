use std::path::PathBuf;

use chrono::{DateTime, Utc};
use clap::{Args, Parser, Subcommand};

/// Longitudinal novelty audits of news-search result pages.
#[derive(Debug, Parser)]
#[command(name = "serp-audit", version, propagate_version = true)]
pub struct Cli {
    /// Run configuration (JSON), such as the run_config.json echoed by an
    /// earlier run. Flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub run_config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse an archive of result pages, or canonicalize a snapshot log.
    Parse(ParseArgs),
    /// Score every round of a snapshot log.
    Novelty(NoveltyArgs),
    /// Summaries, rolled series and unique-item counts from observations.
    Report(ReportArgs),
    /// Generate synthetic snapshot streams with a ground-truth ledger.
    Simulate(SimulateArgs),
    /// Expand a collection plan into its timetable.
    Plan(PlanArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Parse(_) => "parse",
            Command::Novelty(_) => "novelty",
            Command::Report(_) => "report",
            Command::Simulate(_) => "simulate",
            Command::Plan(_) => "plan",
        }
    }
}

#[derive(Debug, Args)]
pub struct ParseArgs {
    /// Engine profiles (TOML).
    #[arg(long, value_name = "FILE")]
    pub profiles: Option<PathBuf>,
    /// Archive directory with an index.jsonl, or a snapshot log.
    #[arg(long = "in", value_name = "PATH")]
    pub input: Option<PathBuf>,
    /// Snapshot log to write.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Expected list size for archive entries that do not state one.
    #[arg(long, value_name = "N")]
    pub expected_count: Option<u32>,
}

#[derive(Debug, Args)]
pub struct NoveltyArgs {
    /// Snapshot log.
    #[arg(long = "in", value_name = "FILE")]
    pub input: Option<PathBuf>,
    /// Rescore every round against this list size instead of the recorded one.
    #[arg(long, value_name = "N")]
    pub expected_count: Option<u32>,
    /// Period boundaries (TOML); defaults to the 2020 election events.
    #[arg(long, value_name = "FILE")]
    pub boundaries: Option<PathBuf>,
    /// Observations file (long-format CSV) to write.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Observations file (long-format CSV).
    #[arg(long = "in", value_name = "FILE")]
    pub input: Option<PathBuf>,
    /// Period boundaries (TOML); defaults to the 2020 election events.
    #[arg(long, value_name = "FILE")]
    pub boundaries: Option<PathBuf>,
    /// Rolling window of the N most recent observations.
    #[arg(long, value_name = "N", conflicts_with = "window_minutes")]
    pub window_n: Option<usize>,
    /// Rolling window by duration instead of count.
    #[arg(long, value_name = "MINUTES")]
    pub window_minutes: Option<i64>,
    /// Bootstrap resamples per interval.
    #[arg(long = "bootstrap", value_name = "N")]
    pub bootstrap_resamples: Option<usize>,
    /// Confidence level of the intervals.
    #[arg(long, value_name = "LEVEL")]
    pub level: Option<f64>,
    /// Bootstrap seed. Falls back to SERP_AUDIT_SEED.
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    /// Snapshot log for unique-item counts and candidate ratios.
    #[arg(long, value_name = "FILE")]
    pub snapshots: Option<PathBuf>,
    /// Count unique items only up to this instant (RFC 3339).
    #[arg(long, value_name = "TIME")]
    pub unique_cutoff: Option<DateTime<Utc>>,
    /// Report directory.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Simulation config (TOML).
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Rounds per stream.
    #[arg(long, value_name = "N")]
    pub rounds: Option<u64>,
    /// Run seed. Falls back to the config, then SERP_AUDIT_SEED.
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    /// Plan config (TOML).
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Timetable CSV to write.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}
