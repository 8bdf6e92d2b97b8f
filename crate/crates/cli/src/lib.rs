//! Command-line pipeline: generate or ingest data, build the climatology,
//! search and train the forecaster, evaluate and compare models.

pub mod commands;
pub mod config;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use sqf_core::evaluation::LeadFilter;
use sqf_core::Error;

pub use config::{validate_config, DataSource, ExperimentConfig};

#[derive(Debug, Parser)]
#[command(name = "sqf", version, about = "Sub-seasonal quantile forecasting of weekly precipitation maxima")]
pub struct Cli {
    /// Experiment configuration (`key = value` lines).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads; defaults to the available cores.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Overrides `seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overrides `out`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Overrides `eval.lead`: a lead in weeks or `all`.
    #[arg(long, global = true)]
    pub lead: Option<String>,
    /// Overrides `eval.quantiles`: one level or `all`.
    #[arg(long, global = true)]
    pub quantile: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Write a synthetic dataset under `out/data`.
    Generate,
    /// Aggregate to weeks and report the sample split.
    Ingest,
    /// Week-of-year climatology of the target.
    Climatology,
    /// Random hyperparameter search.
    Search,
    /// Train one model per sub-region.
    Train,
    /// Forecast the test years and score them.
    Evaluate {
        /// tft, climo or ens.
        #[arg(long)]
        model: String,
    },
    /// Difference table of baselines against a candidate.
    Compare {
        /// Comma-separated baselines.
        #[arg(long)]
        baseline: String,
        #[arg(long)]
        candidate: String,
    },
    /// Forecast and target series at one location.
    Export {
        /// Comma-separated models.
        #[arg(long, default_value = "tft,climo")]
        model: String,
    },
    /// Check the configuration and print the normalized values.
    Validate,
}

/// Failure with its process exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl CliError {
    /// 2 usage or configuration, 3 data, 4 numeric.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) => match e {
                Error::Config { .. } => 2,
                Error::Format { .. }
                | Error::Alignment(_)
                | Error::Coverage(_)
                | Error::EmptyClimatology { .. }
                | Error::Lookup { .. }
                | Error::Vocabulary { .. }
                | Error::Checkpoint(_)
                | Error::Io { .. } => 3,
                Error::Numerics(_) | Error::UndefinedMetric(_) | Error::NonFiniteLoss { .. } | Error::SearchFailed(_) => 4,
            },
        }
    }
}

/// Loads the configuration and applies command-line overrides.
pub fn resolve_config(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let path = cli.config.as_ref().ok_or_else(|| CliError::Usage("--config <path> is required".into()))?;
    let mut cfg = validate_config(path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
        cfg.train.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out = out.clone();
    }
    if let Some(lead) = &cli.lead {
        cfg.eval.lead = lead.parse::<LeadFilter>().map_err(|e| CliError::Usage(format!("--lead: {e}")))?;
    }
    if let Some(q) = &cli.quantile {
        cfg.eval.quantiles = if q == "all" {
            cfg.model.quantiles.clone()
        } else {
            vec![q.parse::<f64>().map_err(|e| CliError::Usage(format!("--quantile `{q}`: {e}")))?]
        };
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Runs one command.
pub fn run(command: &Command, cfg: &ExperimentConfig) -> Result<(), CliError> {
    match command {
        Command::Generate => commands::generate(cfg)?,
        Command::Ingest => commands::ingest(cfg)?,
        Command::Climatology => commands::climatology(cfg)?,
        Command::Search => commands::search(cfg)?,
        Command::Train => commands::train(cfg)?,
        Command::Evaluate { model } => {
            let report = commands::evaluate(cfg, model)?;
            let cols: Vec<String> = report.quantiles.iter().map(|q| q.to_string()).collect();
            println!("model,lead,{}", cols.join(","));
            let vals: Vec<String> = report.regional.iter().map(|v| format!("{v:.6}")).collect();
            println!("{},{},{}", report.model, report.filter, vals.join(","));
        }
        Command::Compare { baseline, candidate } => {
            let comparisons = commands::compare(cfg, baseline, candidate)?;
            let mut out = std::io::stdout().lock();
            sqf_core::evaluation::write_difference_table(&mut out, &comparisons)
                .map_err(|e| CliError::Core(Error::io("stdout", e)))?;
        }
        Command::Export { model } => commands::export(cfg, model)?,
        Command::Validate => println!("{cfg:#?}"),
    }
    Ok(())
}
