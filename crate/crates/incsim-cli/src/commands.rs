//! The four subcommands. Each takes the raw config text, parses it against
//! its schema, runs the corresponding library pipeline, and writes files
//! into the output directory. Validation problems surface as config errors
//! (exit 2) before any simulation starts; failures past that point are
//! runtime errors (exit 3).

use std::fmt::Write as _;
use std::path::Path;

use incsim::analysis::{
    increments, is_report, match_lags, standardize, variance_by_lag, LagTable, ReportConfig,
};
use incsim::bssprime::{simulate_bssprime, BssPrimeSpec, VolatilityModel};
use incsim::distributions::{nig_fit, nig_log_pdf, NigParams, StableParams};
use incsim::gaussian::simulate_gaussian;
use incsim::lss::simulate_lss;
use incsim::stats;
use incsim::trawl::{simulate_trawl, TrawlProcessSpec};
use incsim::Error;
use serde_json::json;

use crate::config::{
    self, AnalyzeConfig, FitNigConfig, FileFormat, MatchConfig, ProcessConfig, SimulateConfig,
    TableFile, VolConfig,
};
use crate::{io, log_info, CliError};

/// Maps a library error raised while checking configured parameters to a
/// config error, so bad parameter values exit with code 2.
fn config_err(e: Error) -> CliError {
    CliError::Config(e.to_string())
}

pub fn simulate(text: &str, config_path: &Path, out_dir: &Path) -> Result<(), CliError> {
    let cfg: SimulateConfig = config::parse(text, &config_path.display().to_string())?;
    config::check_version(cfg.schema_version)?;
    if cfg.n == 0 {
        return Err(CliError::Config("n must be at least 1".into()));
    }
    if !(cfg.dt > 0.0) || !cfg.dt.is_finite() {
        return Err(CliError::Config(format!("dt must be positive, got {}", cfg.dt)));
    }

    let ts = match &cfg.process {
        ProcessConfig::Gaussian { corr } => {
            corr.validate().map_err(config_err)?;
            log_info!("simulating gaussian path, n={} dt={}", cfg.n, cfg.dt);
            simulate_gaussian(corr, cfg.n, cfg.dt, cfg.rng_seed)?
        }
        ProcessConfig::Trawl {
            set,
            seed_law,
            truncation_eps,
            cell_budget,
        } => {
            let mut spec = TrawlProcessSpec::new(set.clone(), seed_law.clone(), cfg.dt);
            if let Some(eps) = truncation_eps {
                spec.truncation_eps = *eps;
            }
            if let Some(budget) = cell_budget {
                spec.cell_budget = *budget;
            }
            spec.validate().map_err(config_err)?;
            log_info!("simulating trawl path, n={} dt={}", cfg.n, cfg.dt);
            simulate_trawl(&spec, cfg.n, cfg.rng_seed)?
        }
        ProcessConfig::Lss {
            kernel,
            alpha,
            gamma,
        } => {
            let params = StableParams {
                alpha: *alpha,
                gamma: *gamma,
            };
            params.validate().map_err(config_err)?;
            kernel.validate().map_err(config_err)?;
            log_info!("simulating stable moving average, n={} dt={}", cfg.n, cfg.dt);
            simulate_lss(kernel, &params, cfg.n, cfg.dt, cfg.rng_seed)?
        }
        ProcessConfig::Bssprime {
            mu_loc,
            beta_coef,
            base_corr,
            vol,
        } => {
            let vol = match vol {
                VolConfig::PairedLogTrawl { marginal } => {
                    VolatilityModel::paired_log_trawl(base_corr, marginal, cfg.dt)
                        .map_err(config_err)?
                }
                VolConfig::AbsGaussRoot => VolatilityModel::AbsGaussRoot(base_corr.clone()),
            };
            let spec = BssPrimeSpec {
                mu_loc: *mu_loc,
                beta_coef: *beta_coef,
                base_corr: base_corr.clone(),
                vol,
                pairing: true,
            };
            spec.validate().map_err(config_err)?;
            log_info!("simulating volatility-modulated path, n={} dt={}", cfg.n, cfg.dt);
            simulate_bssprime(&spec, cfg.n, cfg.dt, cfg.rng_seed)?
        }
    };

    let out_path = out_dir.join(&cfg.output);
    match cfg.format {
        FileFormat::Csv => io::write_csv(&out_path, &ts)?,
        FileFormat::Binary => io::write_binary(&out_path, &ts)?,
    }

    let (mut min, mut max) = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in ts.values() {
        min = min.min(v);
        max = max.max(v);
    }
    let summary = json!({
        "n": ts.len(),
        "dt": ts.dt(),
        "variance": stats::variance(ts.values()),
        "min": min,
        "max": max,
    });
    println!("{summary}");
    Ok(())
}

pub fn analyze(text: &str, config_path: &Path, out_dir: &Path) -> Result<(), CliError> {
    let cfg: AnalyzeConfig = config::parse(text, &config_path.display().to_string())?;
    config::check_version(cfg.schema_version)?;
    if cfg.inputs.len() < 2 {
        return Err(CliError::Config(format!(
            "need at least 2 input series, got {}",
            cfg.inputs.len()
        )));
    }

    let mut series = Vec::with_capacity(cfg.inputs.len());
    for input in &cfg.inputs {
        series.push(io::read_series(Path::new(input))?);
    }

    let defaults = ReportConfig::default();
    let report_cfg = ReportConfig {
        p_frac: cfg.p_frac,
        n_targets: cfg.n_targets.unwrap_or(defaults.n_targets),
        match_tol: cfg.match_tol.unwrap_or(defaults.match_tol),
        bins: cfg.bins.unwrap_or(defaults.bins),
        thinning_factor: cfg.thinning_factor.unwrap_or(defaults.thinning_factor),
        fit_nig: cfg.fit_nig.unwrap_or(defaults.fit_nig),
    };
    log_info!(
        "comparing {} datasets across {} target levels",
        series.len(),
        cfg.targets.as_ref().map_or(report_cfg.n_targets, Vec::len)
    );
    let result = is_report(&series, cfg.targets.as_deref(), &report_cfg)?;
    if result.pairs.is_empty() {
        return Err(CliError::Runtime(format!(
            "no dataset pair completed at any target; failures: {}",
            result.failures.join("; ")
        )));
    }

    let mut csv_files = Vec::with_capacity(result.csv_by_target.len());
    for (k, tc) in result.csv_by_target.iter().enumerate() {
        let name = format!("{}_{k}.csv", cfg.csv_prefix);
        io::write_text(&out_dir.join(&name), &tc.csv)?;
        csv_files.push(json!({ "target": tc.target, "file": name }));
    }
    let report = json!({
        "schema_version": config::SCHEMA_VERSION,
        "targets": result.targets,
        "pairs": result.pairs,
        "failures": result.failures,
        "csv_files": csv_files,
    });
    let report_path = out_dir.join(&cfg.report);
    io::write_text(
        &report_path,
        &serde_json::to_string_pretty(&report).expect("report serializes"),
    )?;

    println!(
        "{}",
        json!({
            "report": report_path.display().to_string(),
            "targets": result.targets.len(),
            "pairs": result.pairs.len(),
            "failures": result.failures.len(),
        })
    );
    Ok(())
}

pub fn fit_nig(text: &str, config_path: &Path, out_dir: &Path) -> Result<(), CliError> {
    let cfg: FitNigConfig = config::parse(text, &config_path.display().to_string())?;
    config::check_version(cfg.schema_version)?;
    if cfg.lags.is_empty() {
        return Err(CliError::Config("lag ladder must not be empty".into()));
    }
    for &u in &cfg.lags {
        if !(u > 0.0) || !u.is_finite() {
            return Err(CliError::Config(format!("lags must be positive, got {u}")));
        }
    }
    let bins = cfg.bins.unwrap_or(64);
    if bins == 0 {
        return Err(CliError::Config("bins must be at least 1".into()));
    }

    let ts = io::read_series(Path::new(&cfg.input))?;
    let mut params_csv = String::from("lag,steps,alpha,beta,mu,delta,log_likelihood,status\n");
    let mut density_csv = String::from("lag,bin_center,log_density,log_fit\n");
    let mut infeasible = 0usize;
    for &u in &cfg.lags {
        let steps = ((u / ts.dt()).round() as usize).max(1);
        let lag = steps as f64 * ts.dt();
        let inc = increments(&ts, steps)?;
        let (p, loglik, status): (NigParams, Option<f64>, &str) = match nig_fit(&inc) {
            Ok(fit) => (fit.params, Some(fit.log_likelihood), "ok"),
            Err(Error::FitInfeasible {
                moment_estimate, ..
            }) => {
                infeasible += 1;
                (moment_estimate, None, "moment_boundary")
            }
            Err(e) => return Err(e.into()),
        };
        let loglik_field = loglik.map_or(String::new(), |v| v.to_string());
        writeln!(
            params_csv,
            "{lag},{steps},{},{},{},{},{loglik_field},{status}",
            p.alpha, p.beta, p.mu, p.delta
        )
        .expect("string write");

        let dens = incsim::analysis::density_log(&inc, bins.min(inc.len() / 10).max(1))?;
        for (c, ld) in dens.centers.iter().zip(&dens.log_density) {
            writeln!(density_csv, "{lag},{c},{ld},{}", nig_log_pdf(*c, &p))
                .expect("string write");
        }
    }

    let params_path = out_dir.join(&cfg.params_output);
    let density_path = out_dir.join(&cfg.density_output);
    io::write_text(&params_path, &params_csv)?;
    io::write_text(&density_path, &density_csv)?;
    println!(
        "{}",
        json!({
            "params": params_path.display().to_string(),
            "density": density_path.display().to_string(),
            "lags": cfg.lags.len(),
            "infeasible": infeasible,
        })
    );
    Ok(())
}

/// Loads one `match` input: a `.json` file is a stored lag table,
/// anything else a series that gets standardized and tabulated.
fn load_table(path: &str, p_frac: Option<f64>) -> Result<LagTable, CliError> {
    if path.ends_with(".json") {
        let table: TableFile = config::parse(&io::read_text(Path::new(path))?, path)?;
        LagTable::new(table.dt, table.entries, table.p_frac)
            .map_err(|e| CliError::Runtime(format!("{path}: {e}")))
    } else {
        let ts = io::read_series(Path::new(path))?;
        let std = standardize(&ts)?;
        Ok(variance_by_lag(&std, None, p_frac)?)
    }
}

pub fn match_lags_cmd(text: &str, config_path: &Path, out_dir: &Path) -> Result<(), CliError> {
    let cfg: MatchConfig = config::parse(text, &config_path.display().to_string())?;
    config::check_version(cfg.schema_version)?;
    if let Some(t) = &cfg.targets {
        if t.is_empty() {
            return Err(CliError::Config("target list must not be empty".into()));
        }
    }
    let n_targets = cfg.n_targets.unwrap_or(12);
    if n_targets == 0 {
        return Err(CliError::Config("n_targets must be at least 1".into()));
    }

    let a = load_table(&cfg.input_a, cfg.p_frac)?;
    let b = load_table(&cfg.input_b, cfg.p_frac)?;

    let targets: Vec<f64> = match &cfg.targets {
        Some(t) => t.clone(),
        None => {
            let (lo_a, hi_a) = a.stat_range();
            let (lo_b, hi_b) = b.stat_range();
            let (lo, hi) = (lo_a.max(lo_b), hi_a.min(hi_b));
            // Disjoint ranges leave no common interval; a ladder over the
            // first table's own range still documents the mismatch, with
            // every row flagged.
            let (lo, hi) = if hi > lo { (lo, hi) } else { (lo_a, hi_a) };
            (0..n_targets)
                .map(|k| {
                    let w = (k + 1) as f64 / (n_targets + 1) as f64;
                    (lo.ln() + w * (hi.ln() - lo.ln())).exp()
                })
                .collect()
        }
    };

    let mut csv = String::from("target,lag_a,lag_b,stat_a,stat_b,status\n");
    let mut flagged = 0usize;
    for &target in &targets {
        match match_lags(&a, &b, &[target]) {
            Ok(rows) => {
                let m = &rows[0];
                writeln!(
                    csv,
                    "{target},{},{},{},{},ok",
                    m.lag_a, m.lag_b, m.stat_a, m.stat_b
                )
                .expect("string write");
            }
            Err(Error::TargetOutOfRange { .. }) => {
                flagged += 1;
                writeln!(csv, "{target},,,,,out_of_range").expect("string write");
            }
            Err(e) => {
                flagged += 1;
                log_info!("target {target}: {e}");
                writeln!(csv, "{target},,,,,failed").expect("string write");
            }
        }
    }

    let out_path = out_dir.join(&cfg.output);
    io::write_text(&out_path, &csv)?;
    println!(
        "{}",
        json!({
            "output": out_path.display().to_string(),
            "targets": targets.len(),
            "flagged": flagged,
        })
    );
    Ok(())
}
