//! Config file schemas. Every command reads one JSON document carrying a
//! `schema_version` and rejecting unknown fields, so misspelled keys fail
//! loudly instead of silently falling back to defaults.

use serde::Deserialize;

use incsim::analysis::LagStats;
use incsim::distributions::LevySeed;
use incsim::gaussian::CorrelationFunction;
use incsim::lss::Kernel;
use incsim::trawl::TrawlSet;

pub const SCHEMA_VERSION: u32 = 1;

use crate::CliError;

/// Parses a config document, translating serde's diagnostics (which carry
/// line/column and field names) into a config error.
pub fn parse<T: serde::de::DeserializeOwned>(text: &str, path: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Config(format!("{path}: {e}")))
}

pub fn check_version(version: u32) -> Result<(), CliError> {
    if version != SCHEMA_VERSION {
        return Err(CliError::Config(format!(
            "schema_version {version} not supported (expected {SCHEMA_VERSION})"
        )));
    }
    Ok(())
}

/// Output file encoding.
#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum FileFormat {
    #[default]
    Csv,
    Binary,
}

/// Which process family to sample, and its parameters.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ProcessConfig {
    Gaussian {
        corr: CorrelationFunction,
    },
    Trawl {
        set: TrawlSet,
        seed_law: LevySeed,
        truncation_eps: Option<f64>,
        cell_budget: Option<f64>,
    },
    Lss {
        kernel: Kernel,
        alpha: f64,
        gamma: f64,
    },
    Bssprime {
        mu_loc: f64,
        beta_coef: f64,
        base_corr: CorrelationFunction,
        vol: VolConfig,
    },
}

/// Volatility model for the modulated family; both variants are paired to
/// the base correlation.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum VolConfig {
    PairedLogTrawl { marginal: LevySeed },
    AbsGaussRoot,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub schema_version: u32,
    pub process: ProcessConfig,
    pub n: usize,
    pub dt: f64,
    pub rng_seed: u64,
    /// Output file name, resolved against the output directory.
    pub output: String,
    #[serde(default)]
    pub format: FileFormat,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeConfig {
    pub schema_version: u32,
    /// Input series files; at least two.
    pub inputs: Vec<String>,
    /// Explicit target levels of the pairing statistic; omitted means a
    /// geometric ladder spanning the common range.
    pub targets: Option<Vec<f64>>,
    pub n_targets: Option<usize>,
    pub p_frac: Option<f64>,
    pub match_tol: Option<f64>,
    pub bins: Option<usize>,
    pub thinning_factor: Option<usize>,
    pub fit_nig: Option<bool>,
    #[serde(default = "default_report")]
    pub report: String,
    #[serde(default = "default_csv_prefix")]
    pub csv_prefix: String,
}

fn default_report() -> String {
    "report.json".into()
}

fn default_csv_prefix() -> String {
    "density_target".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitNigConfig {
    pub schema_version: u32,
    pub input: String,
    /// Lag ladder in time units; must be nonempty.
    pub lags: Vec<f64>,
    pub bins: Option<usize>,
    #[serde(default = "default_params_output")]
    pub params_output: String,
    #[serde(default = "default_density_output")]
    pub density_output: String,
}

fn default_params_output() -> String {
    "nig_params.csv".into()
}

fn default_density_output() -> String {
    "nig_density.csv".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatchConfig {
    pub schema_version: u32,
    /// Series file, or a `.json` lag table.
    pub input_a: String,
    pub input_b: String,
    pub targets: Option<Vec<f64>>,
    pub n_targets: Option<usize>,
    pub p_frac: Option<f64>,
    #[serde(default = "default_match_output")]
    pub output: String,
}

fn default_match_output() -> String {
    "lag_map.csv".into()
}

/// Lag table as stored on disk; the statistics are reassembled through the
/// library constructor so the monotone-smoothed copy is rebuilt rather than
/// trusted from the file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableFile {
    pub dt: f64,
    pub p_frac: Option<f64>,
    pub entries: Vec<LagStats>,
}
