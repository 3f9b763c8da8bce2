mod config;

use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use log::{error, info};

use ratiofolio::pipeline;
use ratiofolio::report::{self, Stage};
use ratiofolio::Manifest;

use config::{RunArgs, RunConfig};

/// Ratio-maximizing portfolio search and train/test backtesting.
///
/// Log verbosity is read from RATIOFOLIO_LOG (e.g. `info`, `debug`).
#[derive(Debug, Parser)]
#[command(name = "ratiofolio", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Search portfolios and write weights, candidate cloud and frontiers
    Optimize(RunArgs),
    /// Backtest the selected portfolios and write curves and the summary
    Backtest(RunArgs),
    /// Write one SVG frontier scatter per objective
    Frontier(RunArgs),
    /// Optimize, backtest and plot in one pass
    Run(RunArgs),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("RATIOFOLIO_LOG", "warn")).init();
    let cli = Cli::parse();
    let (stages, args): (&[Stage], RunArgs) = match cli.command {
        Command::Optimize(a) => (&[Stage::Optimize], a),
        Command::Backtest(a) => (&[Stage::Backtest], a),
        Command::Frontier(a) => (&[Stage::Frontier], a),
        Command::Run(a) => (&Stage::ALL, a),
    };
    match execute(stages, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e:#}");
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn execute(stages: &[Stage], args: RunArgs) -> Result<()> {
    let config = RunConfig::resolve(args)?;
    let manifest = Manifest::load(&config.manifest)?;

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = config.threads {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().context("cannot start worker threads")?;

    let analyses = pool.install(|| {
        manifest
            .universes
            .iter()
            .map(|u| {
                pipeline::analyze_universe(u, &config.settings)
                    .with_context(|| format!("universe `{}`", u.name))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    for a in &analyses {
        for d in &a.result.diagnostics {
            eprintln!("{}: {d}", a.name);
        }
    }

    let artifacts = report::render(&analyses, stages);
    report::write_artifacts(&config.out, &artifacts)?;
    info!("wrote {} files to {}", artifacts.len(), config.out.display());
    Ok(())
}
