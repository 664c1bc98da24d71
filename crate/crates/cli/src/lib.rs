//! Command-line runner: `approx`, `lowerbound`, `race` and `reproduce-all`.
//!
//! Every command writes CSV (header row, comma-separated, doubles with 17
//! significant digits). Exit codes: 0 success, 1 scientific failure,
//! 2 usage or configuration error.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use relupoly::estimators::{
    best_poly_oracle, lower_bound_thm1, optimal_linear, threshold_for, BayesPosterior, Estimator,
    LinearPredictor, DEFAULT_THRESHOLD_CONSTANT, ORACLE_DEGREE_LIMIT,
};
use relupoly::evaluation::{format_f64, paired_risk, RiskReport, DEFAULT_TRIALS};
use relupoly::experiments::{self, AcceptanceSettings, CriterionOutcome, CRITERIA};
use relupoly::model::{build_dictionary, Dictionary, DictionaryKind, ModelParams};
use relupoly::relu_approx::{
    build_poly_soft_threshold, build_relu_poly, relu, sup_error_profile, ReluPolySpec,
    SoftThresholdPolySpec,
};

use config::{EstimatorConfig, ExperimentConfig};

pub const APPROX_HEADER: [&str; 9] = [
    "d",
    "tau",
    "R",
    "beta",
    "err_neg",
    "err_pos",
    "err_band",
    "bound_neg",
    "bound_pos",
];

pub const LOWERBOUND_HEADER: [&str; 6] = [
    "d",
    "oracle_risk",
    "thm1_bound",
    "trivial_risk",
    "linear_risk",
    "ratio_oracle_trivial",
];

pub const SUMMARY_HEADER: [&str; 5] = ["criterion", "status", "elapsed_s", "budget_s", "detail"];

pub const METRICS_HEADER: [&str; 3] = ["criterion", "metric", "value"];

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error("{0}")]
    Scientific(String),
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Scientific(_) => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "relupoly",
    version,
    about = "Sparse-latent regression experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Experiment config (.toml or .json).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file (directory for reproduce-all). Defaults to stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Master seed; overrides the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Monte Carlo trials per estimator; overrides the config.
    #[arg(long, global = true)]
    pub trials: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sup errors of the ReLU polynomial for a list of degrees.
    Approx(ApproxArgs),
    /// Oracle polynomial risk against the lower bound for d = 0..dmax.
    Lowerbound,
    /// Monte Carlo risks of several estimators on shared samples.
    Race,
    /// Runs every acceptance experiment and writes a pass/fail summary.
    ReproduceAll(ReproduceArgs),
}

#[derive(Debug, Args)]
pub struct ApproxArgs {
    /// Comma-separated degrees.
    #[arg(long, value_delimiter = ',')]
    pub degrees: Vec<usize>,
    /// Transition width (default 0.1).
    #[arg(long)]
    pub tau: Option<f64>,
    /// Half-range R of the approximation window.
    #[arg(long = "radius", short = 'R')]
    pub radius: Option<f64>,
    /// Grid points per region.
    #[arg(long)]
    pub grid: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    /// Replace one criterion's tolerance with an unsatisfiable value.
    #[arg(long, hide = true)]
    pub corrupt_tolerance: Option<String>,
    /// Run only these criteria.
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<String>,
}

/// Runs a parsed command on a pool of `--threads` workers.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start thread pool: {e}")))?;
    pool.install(|| dispatch(cli))
}

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    let config = match &cli.config {
        Some(path) => Some(ExperimentConfig::load(path)?),
        None => None,
    };
    match &cli.command {
        Command::Approx(args) => cmd_approx(cli, config.as_ref(), args),
        Command::Lowerbound => cmd_lowerbound(cli, require_config(config.as_ref(), "lowerbound")?),
        Command::Race => cmd_race(cli, require_config(config.as_ref(), "race")?),
        Command::ReproduceAll(args) => cmd_reproduce_all(cli, args),
    }
}

fn require_config<'a>(
    config: Option<&'a ExperimentConfig>,
    cmd: &str,
) -> Result<&'a ExperimentConfig, CliError> {
    config.ok_or_else(|| CliError::Usage(format!("{cmd} needs --config")))
}

fn output_path(cli: &Cli, config: Option<&ExperimentConfig>) -> Option<PathBuf> {
    cli.out
        .clone()
        .or_else(|| config.and_then(|c| c.out.clone()))
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    match path {
        None => Ok(Box::new(io::stdout())),
        Some(p) => {
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)?;
            }
            Ok(Box::new(File::create(p)?))
        }
    }
}

fn csv_writer(path: Option<&Path>) -> Result<csv::Writer<Box<dyn Write>>, CliError> {
    Ok(csv::Writer::from_writer(open_output(path)?))
}

fn opt_f64(v: Option<f64>) -> String {
    v.map(format_f64).unwrap_or_default()
}

/// `approx`: one row per degree.
pub fn cmd_approx(
    cli: &Cli,
    config: Option<&ExperimentConfig>,
    args: &ApproxArgs,
) -> Result<(), CliError> {
    let block = config.and_then(|c| c.approx.clone());
    let degrees = if !args.degrees.is_empty() {
        args.degrees.clone()
    } else {
        block
            .as_ref()
            .map(|b| b.degrees.clone())
            .unwrap_or_default()
    };
    if degrees.is_empty() {
        return Err(CliError::Usage(
            "approx needs a non-empty --degrees list".into(),
        ));
    }
    let tau = args.tau.or(block.as_ref().map(|b| b.tau)).unwrap_or(0.1);
    let r = args.radius.or(block.as_ref().map(|b| b.r)).unwrap_or(1.0);
    let grid = args
        .grid
        .or(block.as_ref().map(|b| b.grid))
        .unwrap_or_else(config::default_grid);
    let specs = degrees
        .iter()
        .map(|&d| ReluPolySpec::new(d, tau, r).map_err(|e| CliError::Usage(e.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    let mut rows = Vec::with_capacity(specs.len());
    for spec in &specs {
        let p = build_relu_poly(spec).map_err(|e| CliError::Usage(e.to_string()))?;
        let prof = sup_error_profile(&p, relu, (-r, r), tau * r, grid)
            .map_err(|e| CliError::Usage(e.to_string()))?;
        rows.push(vec![
            spec.d.to_string(),
            format_f64(spec.tau),
            format_f64(spec.r),
            format_f64(spec.beta),
            opt_f64(prof.negative.map(|e| e.sup)),
            opt_f64(prof.positive.map(|e| e.sup)),
            opt_f64(prof.band.map(|e| e.sup)),
            format_f64(spec.bound_negative()),
            format_f64(spec.bound_positive()),
        ]);
    }
    let mut w = csv_writer(output_path(cli, config).as_deref())?;
    w.write_record(APPROX_HEADER)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

fn model_params(config: &ExperimentConfig) -> Result<ModelParams, CliError> {
    let params = config.model()?.params();
    params
        .validate()
        .map_err(|e| CliError::Config(e.to_string()))?;
    Ok(params)
}

fn dictionary(config: &ExperimentConfig, params: &ModelParams) -> Result<Dictionary, CliError> {
    let (kind, seed) = config
        .dictionary
        .as_ref()
        .map(|d| (d.kind, d.seed))
        .unwrap_or((DictionaryKind::Identity, 0));
    build_dictionary(kind, params.n, params.m, seed).map_err(|e| CliError::Config(e.to_string()))
}

/// `lowerbound`: exact oracle risk and the lower bound for `d = 0..=dmax`.
pub fn cmd_lowerbound(cli: &Cli, config: &ExperimentConfig) -> Result<(), CliError> {
    let params = model_params(config)?;
    params
        .check_lower_bound_regime()
        .map_err(|e| CliError::Config(e.to_string()))?;
    if let Some(d) = &config.dictionary {
        if d.kind == DictionaryKind::RandomSign {
            return Err(CliError::Config(
                "lowerbound needs an orthogonal dictionary".into(),
            ));
        }
    }
    let dmax = config.lowerbound.as_ref().map(|b| b.dmax).unwrap_or(8);
    if dmax > ORACLE_DEGREE_LIMIT {
        return Err(CliError::Config(format!(
            "dmax {dmax} exceeds {ORACLE_DEGREE_LIMIT}"
        )));
    }
    let trivial = params.gamma * params.gamma * params.on_probability() * params.w_norm_sq();
    let linear = LinearPredictor::closed_form_risk(&params);
    let mut violations = Vec::new();
    let mut w = csv_writer(output_path(cli, Some(config)).as_deref())?;
    w.write_record(LOWERBOUND_HEADER)?;
    for d in 0..=dmax {
        let oracle = best_poly_oracle(&params, d)
            .map_err(|e| CliError::Config(e.to_string()))?
            .risk;
        let bound = lower_bound_thm1(&params, d).map_err(|e| CliError::Config(e.to_string()))?;
        if oracle < bound {
            violations.push(d);
        }
        w.write_record([
            d.to_string(),
            format_f64(oracle),
            format_f64(bound),
            format_f64(trivial),
            if d == 1 {
                format_f64(linear)
            } else {
                String::new()
            },
            format_f64(oracle / trivial),
        ])?;
    }
    w.flush()?;
    if violations.is_empty() {
        Ok(())
    } else {
        Err(CliError::Scientific(format!(
            "oracle risk below the lower bound at d = {violations:?}"
        )))
    }
}

/// Builds a race estimator or explains why it cannot be built.
pub fn build_estimator(
    cfg: &EstimatorConfig,
    params: &ModelParams,
    dict: &Dictionary,
) -> Result<Estimator, String> {
    let threshold = |c: &Option<f64>, tau: &Option<f64>| {
        tau.unwrap_or_else(|| threshold_for(c.unwrap_or(DEFAULT_THRESHOLD_CONSTANT), params, dict))
    };
    match cfg {
        EstimatorConfig::Zero => Ok(Estimator::Zero),
        EstimatorConfig::Linear => optimal_linear(params, dict)
            .map(Estimator::Linear)
            .map_err(|e| e.to_string()),
        EstimatorConfig::Bayes => {
            if !dict.is_orthogonal() {
                return Err("bayes needs an orthogonal dictionary".into());
            }
            BayesPosterior::new(params)
                .map(Estimator::Bayes)
                .map_err(|e| e.to_string())
        }
        EstimatorConfig::Nn { c, tau } => {
            let tau = threshold(c, tau);
            if !(tau > 0.0) {
                return Err(format!("threshold must be positive, got {tau}"));
            }
            Ok(Estimator::SoftThreshold { tau })
        }
        EstimatorConfig::Poly {
            c,
            tau,
            eps,
            degree,
        } => {
            let tau = threshold(c, tau);
            let eps = eps.unwrap_or(tau / params.m as f64);
            let cap = params.l1_cap();
            let spec = match degree {
                Some(d) => SoftThresholdPolySpec::new(tau, cap, eps, *d),
                None => SoftThresholdPolySpec::calibrated(tau, cap, eps),
            }
            .map_err(|e| e.to_string())?;
            build_poly_soft_threshold(&spec)
                .map(Estimator::PolySoftThreshold)
                .map_err(|e| e.to_string())
        }
        EstimatorConfig::Oracle { degree } => {
            if !dict.is_orthogonal() {
                return Err("oracle needs an orthogonal dictionary".into());
            }
            best_poly_oracle(params, *degree)
                .map(|fit| Estimator::HermitePoly(fit.expansion))
                .map_err(|e| e.to_string())
        }
    }
}

fn error_row(
    cfg: &EstimatorConfig,
    digest: &str,
    trials: usize,
    seed: u64,
    msg: &str,
) -> Vec<String> {
    let id = serde_json::to_value(cfg)
        .ok()
        .and_then(|v| v.get("kind").and_then(|k| k.as_str()).map(String::from))
        .unwrap_or_else(|| "unknown".into());
    let mut row = vec![String::new(); RiskReport::CSV_HEADER.len()];
    row[0] = id;
    row[1] = digest.into();
    row[2] = trials.to_string();
    row[7] = seed.to_string();
    row[10] = format!("error: {msg}");
    row
}

/// `race`: paired Monte Carlo risks, one row per configured estimator.
pub fn cmd_race(cli: &Cli, config: &ExperimentConfig) -> Result<(), CliError> {
    let params = model_params(config)?;
    let dict = dictionary(config, &params)?;
    if config.estimators.is_empty() {
        return Err(CliError::Config(
            "race needs at least one [[estimators]] entry".into(),
        ));
    }
    let trials = cli.trials.or(config.trials).unwrap_or(DEFAULT_TRIALS);
    let seed = cli.seed.or(config.seed).unwrap_or(0);
    let built: Vec<Result<Estimator, String>> = config
        .estimators
        .iter()
        .map(|e| build_estimator(e, &params, &dict))
        .collect();
    let ok: Vec<Estimator> = built
        .iter()
        .filter_map(|b| b.as_ref().ok().cloned())
        .collect();
    let run = if ok.is_empty() {
        None
    } else {
        Some(
            paired_risk(&ok, &params, &dict, trials, seed)
                .map_err(|e| CliError::Config(e.to_string()))?,
        )
    };
    let digest = relupoly::evaluation::params_digest(&params, &dict);
    let mut w = csv_writer(output_path(cli, Some(config)).as_deref())?;
    w.write_record(RiskReport::CSV_HEADER)?;
    let mut reports = run.iter().flat_map(|r| r.reports.iter());
    let mut failures = Vec::new();
    for (cfg, b) in config.estimators.iter().zip(&built) {
        match b {
            Ok(_) => {
                let report = reports.next().expect("one report per built estimator");
                w.write_record(report.csv_fields())?;
            }
            Err(msg) => {
                log::error!("estimator {cfg:?}: {msg}");
                w.write_record(error_row(cfg, &digest, trials, seed, msg))?;
                failures.push(msg.clone());
            }
        }
    }
    w.flush()?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Config(format!(
            "{} estimator(s) misconfigured: {}",
            failures.len(),
            failures.join("; ")
        )))
    }
}

/// `reproduce-all`: every acceptance criterion, a summary and a metrics file.
pub fn cmd_reproduce_all(cli: &Cli, args: &ReproduceArgs) -> Result<(), CliError> {
    let outdir = cli
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("reproduce-out"));
    std::fs::create_dir_all(&outdir)?;
    if cli.trials.is_some() {
        log::warn!("--trials is ignored by reproduce-all; trial counts are pinned per criterion");
    }
    let ids: Vec<String> = if args.only.is_empty() {
        CRITERIA.iter().map(|s| s.to_string()).collect()
    } else {
        args.only.clone()
    };
    if let Some(bad) = ids.iter().find(|id| !CRITERIA.contains(&id.as_str())) {
        return Err(CliError::Usage(format!(
            "unknown criterion {bad}; expected one of {CRITERIA:?}"
        )));
    }
    if let Some(c) = &args.corrupt_tolerance {
        if !CRITERIA.contains(&c.as_str()) {
            return Err(CliError::Usage(format!("unknown criterion {c}")));
        }
    }
    let settings = AcceptanceSettings {
        seed: cli.seed.unwrap_or(experiments::DEFAULT_SEED),
        corrupt: args.corrupt_tolerance.clone(),
    };
    let mut outcomes: Vec<CriterionOutcome> = Vec::new();
    for id in &ids {
        let outcome = experiments::run_criterion(id, &settings).expect("validated id");
        eprintln!("{}", outcome.line());
        outcomes.push(outcome);
    }
    let mut summary = csv_writer(Some(&outdir.join("summary.csv")))?;
    summary.write_record(SUMMARY_HEADER)?;
    let mut metrics = csv_writer(Some(&outdir.join("metrics.csv")))?;
    metrics.write_record(METRICS_HEADER)?;
    for o in &outcomes {
        summary.write_record([
            o.id.clone(),
            if o.passed { "PASS" } else { "FAIL" }.to_string(),
            format_f64(o.elapsed_s),
            format_f64(o.budget_s),
            o.detail.clone(),
        ])?;
        for (name, value) in &o.metrics {
            metrics.write_record([o.id.clone(), name.clone(), format_f64(*value)])?;
        }
    }
    summary.flush()?;
    metrics.flush()?;
    let failed: Vec<&str> = outcomes
        .iter()
        .filter(|o| !o.passed)
        .map(|o| o.id.as_str())
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Scientific(format!(
            "failed criteria: {}",
            failed.join(", ")
        )))
    }
}
