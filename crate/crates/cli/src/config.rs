//! Merges command-line flags over an optional TOML config file.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use chrono::NaiveDate;
use clap::Args;
use serde::Deserialize;

use ratiofolio::optimizer::{DEFAULT_CANDIDATES, DEFAULT_SEED};
use ratiofolio::{CumulativeMode, EvaluationParams, RunSettings, SamplingScheme, SearchConfig, SplitSpec};

fn parse_date(s: &str) -> Result<NaiveDate, String> {
    NaiveDate::parse_from_str(s, "%Y-%m-%d").map_err(|e| format!("expected YYYY-MM-DD: {e}"))
}

fn parse_mode(s: &str) -> Result<CumulativeMode, String> {
    s.parse().map_err(|e: ratiofolio::Error| e.to_string())
}

fn parse_sampling(s: &str) -> Result<SamplingScheme, String> {
    match s {
        "uniform" => Ok(SamplingScheme::NormalizedUniform),
        "dirichlet" => Ok(SamplingScheme::FlatDirichlet),
        _ => Err(format!("unknown sampling scheme `{s}` (expected uniform or dirichlet)")),
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// TOML file supplying any of these options; flags take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Universe manifest (TOML)
    #[arg(long)]
    pub manifest: Option<PathBuf>,

    #[arg(long, value_parser = parse_date, value_name = "YYYY-MM-DD")]
    pub train_start: Option<NaiveDate>,
    #[arg(long, value_parser = parse_date, value_name = "YYYY-MM-DD")]
    pub train_end: Option<NaiveDate>,
    #[arg(long, value_parser = parse_date, value_name = "YYYY-MM-DD")]
    pub test_start: Option<NaiveDate>,
    #[arg(long, value_parser = parse_date, value_name = "YYYY-MM-DD")]
    pub test_end: Option<NaiveDate>,

    /// Number of random portfolios [default: 10000]
    #[arg(long)]
    pub candidates: Option<usize>,

    /// RNG seed [default: 42]
    #[arg(long)]
    pub seed: Option<u64>,

    /// Annual risk-free rate [default: 0.0]
    #[arg(long)]
    pub risk_free: Option<f64>,

    /// Trading days per year [default: 252]
    #[arg(long)]
    pub annualization: Option<u32>,

    /// arithmetic or compounded [default: arithmetic]
    #[arg(long, value_parser = parse_mode)]
    pub cum_mode: Option<CumulativeMode>,

    /// Output directory [default: out]
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Worker threads for candidate evaluation [default: all cores]
    #[arg(long)]
    pub threads: Option<usize>,

    /// uniform or dirichlet [default: uniform]
    #[arg(long, value_parser = parse_sampling)]
    pub sampling: Option<SamplingScheme>,

    /// Measure drawdown over only the trailing N training days
    #[arg(long, value_name = "DAYS")]
    pub calmar_window: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    manifest: Option<PathBuf>,
    train_start: Option<NaiveDate>,
    train_end: Option<NaiveDate>,
    test_start: Option<NaiveDate>,
    test_end: Option<NaiveDate>,
    candidates: Option<usize>,
    seed: Option<u64>,
    risk_free: Option<f64>,
    annualization: Option<u32>,
    cum_mode: Option<CumulativeMode>,
    out: Option<PathBuf>,
    threads: Option<usize>,
    sampling: Option<String>,
    calmar_window: Option<usize>,
}

impl FileConfig {
    fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let mut cfg: FileConfig =
            toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.manifest, &mut cfg.out].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }
}

/// Fully resolved configuration for one invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub manifest: PathBuf,
    pub out: PathBuf,
    pub threads: Option<usize>,
    pub settings: RunSettings,
}

impl RunConfig {
    pub fn resolve(args: RunArgs) -> Result<Self> {
        let file = match &args.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        let defaults = SplitSpec::default();
        let split = SplitSpec::new(
            args.train_start.or(file.train_start).unwrap_or(defaults.train_start),
            args.train_end.or(file.train_end).unwrap_or(defaults.train_end),
            args.test_start.or(file.test_start).unwrap_or(defaults.test_start),
            args.test_end.or(file.test_end).unwrap_or(defaults.test_end),
        )?;
        let sampling = match (args.sampling, file.sampling) {
            (Some(s), _) => s,
            (None, Some(s)) => parse_sampling(&s).map_err(anyhow::Error::msg)?,
            (None, None) => SamplingScheme::default(),
        };
        let search = SearchConfig {
            num_candidates: args.candidates.or(file.candidates).unwrap_or(DEFAULT_CANDIDATES),
            seed: args.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            params: EvaluationParams {
                annualization: args.annualization.or(file.annualization).unwrap_or(252) as f64,
                risk_free_rate: args.risk_free.or(file.risk_free).unwrap_or(0.0),
                calmar_window: args.calmar_window.or(file.calmar_window),
            },
            sampling,
            ..SearchConfig::default()
        };
        search.validate()?;

        let Some(manifest) = args.manifest.or(file.manifest) else {
            bail!("no manifest given (use --manifest or set `manifest` in the config file)");
        };
        if !manifest.is_file() {
            bail!("manifest {} does not exist", manifest.display());
        }
        let threads = args.threads.or(file.threads);
        if threads == Some(0) {
            bail!("--threads must be at least 1");
        }
        Ok(Self {
            manifest,
            out: args.out.or(file.out).unwrap_or_else(|| PathBuf::from("out")),
            threads,
            settings: RunSettings {
                split,
                search,
                mode: args.cum_mode.or(file.cum_mode).unwrap_or_default(),
            },
        })
    }
}
