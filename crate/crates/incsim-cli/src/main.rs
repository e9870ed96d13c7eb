//! Command-line front end for the incsim toolkit.
//!
//! Four verbs, each driven by a JSON config file: `simulate` writes a sample
//! path, `analyze` runs the increment-density comparison across a family of
//! series, `fit-nig` fits increment laws over a lag ladder, and `match` maps
//! lags between two processes. Exit code 2 flags a config problem, 3 a
//! runtime failure; anything on stdout is the command's actual output.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicU8, Ordering};

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod io;

#[derive(Debug)]
pub enum CliError {
    /// The configuration or invocation is unusable. Exit code 2.
    Config(String),
    /// The work itself failed after a valid configuration. Exit code 3.
    Runtime(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Runtime(msg) => write!(f, "error: {msg}"),
        }
    }
}

impl From<incsim::Error> for CliError {
    fn from(e: incsim::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

#[derive(Parser)]
#[command(name = "incsim", version, about = "Simulation and increment-density analysis for incremental-similarity processes")]
struct Cli {
    /// Path to the JSON config for the chosen command.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory for output files; created if absent. Defaults to the
    /// current directory.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,

    /// Worker thread count. Overrides the INCSIM_THREADS environment
    /// variable; without either, all cores are used.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// One of error, warn, info, debug.
    #[arg(long, global = true, default_value = "warn")]
    log_level: String,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate a process path and write it to a file.
    Simulate,
    /// Compare increment densities across a family of series at matched lags.
    Analyze,
    /// Fit normal-inverse-Gaussian laws to increments over a lag ladder.
    FitNig,
    /// Map lags between two processes so their increment statistics agree.
    Match,
}

static LOG_LEVEL: AtomicU8 = AtomicU8::new(1);

const LEVELS: [&str; 4] = ["error", "warn", "info", "debug"];

pub fn log(level: &str, msg: std::fmt::Arguments<'_>) {
    let rank = LEVELS.iter().position(|l| *l == level).unwrap_or(0) as u8;
    if rank <= LOG_LEVEL.load(Ordering::Relaxed) {
        eprintln!("[{level}] {msg}");
    }
}

macro_rules! log_info {
    ($($arg:tt)*) => { crate::log("info", format_args!($($arg)*)) };
}
pub(crate) use log_info;

fn resolve_threads(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    if let Some(n) = flag {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        return Ok(Some(n));
    }
    match std::env::var("INCSIM_THREADS") {
        Ok(raw) => {
            let n: usize = raw.parse().map_err(|_| {
                CliError::Config(format!("INCSIM_THREADS must be a positive integer, got '{raw}'"))
            })?;
            if n == 0 {
                return Err(CliError::Config("INCSIM_THREADS must be at least 1".into()));
            }
            Ok(Some(n))
        }
        Err(_) => Ok(None),
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let rank = LEVELS
        .iter()
        .position(|l| *l == cli.log_level)
        .ok_or_else(|| {
            CliError::Config(format!(
                "unknown log level '{}'; expected one of {}",
                cli.log_level,
                LEVELS.join(", ")
            ))
        })?;
    LOG_LEVEL.store(rank as u8, Ordering::Relaxed);

    if let Some(n) = resolve_threads(cli.threads)? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))?;
    }

    let config_path = cli
        .config
        .as_deref()
        .ok_or_else(|| CliError::Config("--config is required".into()))?;
    let config_text = std::fs::read_to_string(config_path).map_err(|e| {
        CliError::Config(format!("read {}: {e}", config_path.display()))
    })?;

    let out_dir: &Path = cli.output_dir.as_deref().unwrap_or(Path::new("."));
    if !out_dir.exists() {
        std::fs::create_dir_all(out_dir).map_err(|e| {
            CliError::Runtime(format!("create {}: {e}", out_dir.display()))
        })?;
    }

    match cli.cmd {
        Cmd::Simulate => commands::simulate(&config_text, config_path, out_dir),
        Cmd::Analyze => commands::analyze(&config_text, config_path, out_dir),
        Cmd::FitNig => commands::fit_nig(&config_text, config_path, out_dir),
        Cmd::Match => commands::match_lags_cmd(&config_text, config_path, out_dir),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            match e {
                CliError::Config(_) => ExitCode::from(2),
                CliError::Runtime(_) => ExitCode::from(3),
            }
        }
    }
}
