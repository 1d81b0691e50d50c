use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use depthreat_core::stats::Method;
use depthreat_core::time::{self, Timestamp};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "depthreat",
    version,
    about = "Time-travel vulnerability analysis of npm application dependencies"
)]
pub struct Cli {
    /// More log output on stderr (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Assess every application at one instant.
    Scan(ScanArgs),
    /// Assess every application at k evenly spaced points of its lifespan.
    Evolve(EvolveArgs),
    /// Who is responsible for the high-threat dependencies.
    Blame(BlameArgs),
    /// Mann-Whitney U test and Cliff's delta of two samples.
    Stats(StatsArgs),
    /// Validate, curate or fetch input data.
    #[command(subcommand)]
    Ingest(IngestCommand),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnapshotAt {
    /// Each application's last commit.
    End,
    Instant(Timestamp),
}

impl std::str::FromStr for SnapshotAt {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "end" {
            return Ok(SnapshotAt::End);
        }
        time::parse_instant(s)
            .map(SnapshotAt::Instant)
            .map_err(|e| format!("{e}; expected RFC 3339, YYYY-MM-DD or \"end\""))
    }
}

impl Serialize for SnapshotAt {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            SnapshotAt::End => s.serialize_str("end"),
            SnapshotAt::Instant(t) => s.serialize_str(&time::format_rfc3339(t)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Preset {
    #[value(name = "paper-2019")]
    #[serde(rename = "paper-2019")]
    Preset2019,
}

#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = true)]
pub struct Sources {
    /// history-json files, one per application.
    #[arg(long = "history", value_name = "PATH", num_args = 1..)]
    pub histories: Vec<PathBuf>,
    /// Git repositories to mine for package.json history.
    #[arg(long = "repo", value_name = "PATH", num_args = 1..)]
    pub repos: Vec<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct MaturityArgs {
    /// Named maturity filter; individual flags below override its fields.
    #[arg(long)]
    pub preset: Option<Preset>,
    #[arg(long, value_name = "N")]
    pub min_commits: Option<u64>,
    #[arg(long, value_name = "N")]
    pub min_contributors: Option<u64>,
    #[arg(long, value_name = "N")]
    pub min_dependencies: Option<u64>,
    /// First commit must be strictly earlier.
    #[arg(long, value_name = "INSTANT", value_parser = parse_instant_arg)]
    pub created_before: Option<Timestamp>,
    /// Last commit must be strictly later.
    #[arg(long, value_name = "INSTANT", value_parser = parse_instant_arg)]
    pub active_after: Option<Timestamp>,
    #[arg(long)]
    pub exclude_forks: bool,
}

impl MaturityArgs {
    pub fn any(&self) -> bool {
        self.preset.is_some()
            || self.min_commits.is_some()
            || self.min_contributors.is_some()
            || self.min_dependencies.is_some()
            || self.created_before.is_some()
            || self.active_after.is_some()
            || self.exclude_forks
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Report destination; stdout when absent.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct AnalysisArgs {
    /// release-index-json file.
    #[arg(long, value_name = "PATH")]
    pub registry: PathBuf,
    /// advisories-json file.
    #[arg(long, value_name = "PATH")]
    pub advisories: PathBuf,
    #[command(flatten)]
    pub sources: Sources,
    #[command(flatten)]
    pub maturity: MaturityArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long, value_name = "N")]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub analysis: AnalysisArgs,
    /// Snapshot instant: RFC 3339, YYYY-MM-DD (midnight UTC), or "end".
    #[arg(long, value_name = "INSTANT")]
    pub at: SnapshotAt,
}

#[derive(Debug, Clone, Args)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub analysis: AnalysisArgs,
    /// Number of equal lifespan intervals.
    #[arg(long, value_name = "K")]
    pub snapshots: u32,
}

#[derive(Debug, Clone, Args)]
#[group(id = "when", required = true, multiple = false, args = ["at", "snapshots"])]
pub struct BlameArgs {
    #[command(flatten)]
    pub analysis: AnalysisArgs,
    #[arg(long, value_name = "INSTANT")]
    pub at: Option<SnapshotAt>,
    #[arg(long, value_name = "K")]
    pub snapshots: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Auto,
    Exact,
    Normal,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Auto => Method::Auto,
            MethodArg::Exact => Method::Exact,
            MethodArg::Normal => Method::Normal,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct StatsArgs {
    /// Sample hypothesised to be larger. Numbers separated by whitespace or
    /// commas, or a JSON array.
    pub x: PathBuf,
    pub y: PathBuf,
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    pub method: MethodArg,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Subcommand)]
pub enum IngestCommand {
    /// Curate an advisories-json file.
    Advisories {
        input: PathBuf,
        /// Write the curated advisories here.
        #[arg(long, value_name = "PATH")]
        emit: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Validate and normalise a release-index-json file.
    Registry {
        input: PathBuf,
        #[arg(long, value_name = "PATH")]
        emit: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Build a release index from registry metadata documents.
    Fetch {
        /// Registry base URL, e.g. https://registry.npmjs.org
        #[arg(long)]
        endpoint: String,
        #[arg(required = true)]
        packages: Vec<String>,
        #[arg(long, value_name = "PATH")]
        emit: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Mine git repositories into history-json files.
    History {
        #[arg(required = true)]
        repos: Vec<PathBuf>,
        /// Directory receiving `<application>.json` per repository.
        #[arg(long, value_name = "DIR")]
        emit_dir: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
}

fn parse_instant_arg(s: &str) -> Result<Timestamp, String> {
    time::parse_instant(s).map_err(|e| e.to_string())
}
