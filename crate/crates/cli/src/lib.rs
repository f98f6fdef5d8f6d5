//! Command-line driver: parses flags over a TOML config, runs one experiment
//! on a dedicated worker pool and writes hash-stamped CSV/JSON files.

pub mod args;
pub mod commands;
pub mod config;
pub mod report;

use std::ffi::OsString;

use clap::Parser;
use hypgeo::GeomError;

pub use args::Cli;
pub use config::RunConfig;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("i/o: {0}")]
    Io(String),

    /// At least one checked inequality failed; `witness` holds the failing
    /// records.
    #[error("invariant violation: {summary}")]
    Violation { summary: String, witness: serde_json::Value },

    #[error("incomplete enumeration: {0}")]
    Incomplete(String),
}

impl From<GeomError> for CliError {
    fn from(e: GeomError) -> Self {
        match e {
            GeomError::Incomplete(m) => CliError::Incomplete(m),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Violation { .. } => 2,
            CliError::Incomplete(_) => 3,
        }
    }
}

/// Runs the CLI on `argv` and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(summary) => {
            println!("{summary}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            if let CliError::Violation { witness, .. } = &e {
                let mut w = witness.clone();
                report::round_json(&mut w);
                eprintln!("{}", serde_json::to_string_pretty(&w).unwrap_or_default());
            }
            e.exit_code()
        }
    }
}

/// Resolves the configuration and runs the subcommand on a pool of the
/// requested size.
pub fn execute(cli: &Cli) -> Result<String, CliError> {
    let cfg = cli.resolve_config()?;
    cfg.backend_kind()?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if cfg.workers > 0 {
        pool = pool.num_threads(cfg.workers);
    }
    let pool = pool.build().map_err(|e| CliError::Usage(format!("worker pool: {e}")))?;
    pool.install(|| commands::dispatch(&cli.command, &cfg))
}
