//! The `stancemap` command line. [`run`] parses arguments, executes one
//! command and returns the process exit code:
//!
//! - 0: success
//! - 1: validation failure (bad arguments, configuration or inputs), reported
//!   before anything is written
//! - 2: partial failure (some records were rejected or some pairs failed)
//!
//! With `--json` every command prints one JSON object on stdout.

mod commands;
pub mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use chrono::{DateTime, Utc};
use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use config::{CliConfig, Overrides, ProviderKind, ResolverKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_PARTIAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "stancemap", version, about = "Truthfulness-stance ingestion, classification and reporting")]
pub struct Cli {
    /// Store file (JSONL write log).
    #[arg(long, global = true)]
    pub store: Option<PathBuf>,
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub provider: Option<ProviderKind>,
    /// Worker threads for `classify`.
    #[arg(long, global = true)]
    pub concurrency: Option<usize>,
    /// Print one JSON object instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Pin "now" (RFC 3339) for timestamps written to the store, so repeated
    /// runs produce identical stores.
    #[arg(long, global = true)]
    pub now: Option<DateTime<Utc>>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportKind {
    Alignment,
    Confusion,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate and store claims from a JSONL file.
    IngestClaims {
        #[arg(long)]
        input: PathBuf,
    },
    /// Filter, geocode and store the posts retrieved for one claim.
    IngestTweets {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        claim_id: String,
        #[arg(long, value_enum, default_value = "offline")]
        resolver: ResolverKind,
    },
    /// Store context documents for claims and posts.
    IngestDocuments {
        #[arg(long)]
        input: PathBuf,
    },
    /// Resolve one location text, or retry stored posts without geography.
    Geocode {
        #[arg(long, value_enum, default_value = "offline")]
        resolver: ResolverKind,
        #[arg(long)]
        text: Option<String>,
    },
    /// Classify unclassified pairs (all pairs with --reclassify).
    Classify {
        #[arg(long)]
        reclassify: bool,
    },
    /// Print confusion metrics and alignment reports for the store, or for a
    /// count fixture.
    Evaluate {
        #[arg(long)]
        fixture: Option<PathBuf>,
    },
    /// Write an alignment or confusion report as CSV or JSON.
    ExportReport {
        #[arg(long, value_enum)]
        format: Format,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, value_enum, default_value = "alignment")]
        report: ReportKind,
        /// topic, state, leaning or country_vs_all.
        #[arg(long, default_value = "topic")]
        dimension: String,
        #[arg(long)]
        top: Option<usize>,
    },
    /// Serve the read-only HTTP API.
    Serve {
        #[arg(long)]
        listen: Option<String>,
    },
    /// Write the store as canonical JSONL plus a manifest.
    Export {
        #[arg(long)]
        dir: PathBuf,
    },
    /// Load a JSONL export into the store.
    Import {
        #[arg(long)]
        dir: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    /// Bad arguments, configuration or input; nothing was written.
    Validation(String),
    /// The command failed while running.
    Failed(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) | CliError::Failed(m) => f.write_str(m),
        }
    }
}

/// What a command reports back.
pub struct Outcome {
    pub partial: bool,
    pub json: Value,
    pub text: String,
}

pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_INVALID,
            };
            let _ = if code == EXIT_OK {
                write!(out, "{}", e.render())
            } else {
                write!(err, "{}", e.render())
            };
            return code;
        }
    };
    let json_mode = cli.json;
    let result = CliConfig::load(
        cli.config.as_deref(),
        Overrides {
            store: cli.store.clone(),
            provider: cli.provider,
            concurrency: cli.concurrency,
        },
    )
    .and_then(|config| commands::execute(&cli, &config, out));
    match result {
        Ok(outcome) => {
            let _ = if json_mode {
                writeln!(out, "{}", outcome.json)
            } else {
                write!(out, "{}", outcome.text)
            };
            if outcome.partial {
                EXIT_PARTIAL
            } else {
                EXIT_OK
            }
        }
        Err(e) => {
            if json_mode {
                let kind = match e {
                    CliError::Validation(_) => "validation",
                    CliError::Failed(_) => "failed",
                };
                let _ = writeln!(out, "{}", json!({ "error": kind, "message": e.to_string() }));
            }
            let _ = writeln!(err, "error: {e}");
            EXIT_INVALID
        }
    }
}
