//! End-to-end analysis of one universe: load, filter, align, split,
//! optimize on the training window, then backtest every selected portfolio.

use log::{info, warn};
use serde::{Deserialize, Serialize};

use crate::backtest::{self, BacktestReport, SummaryRow, Window};
use crate::error::{Error, Result};
use crate::manifest::UniverseSpec;
use crate::market_data::{self, AlignedReturnPanel, PriceSeries, SplitSpec};
use crate::metrics::{self, AssetStats, CumulativeMode};
use crate::optimizer::{self, OptimizationResult, SearchConfig};
use crate::portfolio::{Evaluator, Objective};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunSettings {
    pub split: SplitSpec,
    pub search: SearchConfig,
    pub mode: CumulativeMode,
}

#[derive(Debug, Clone)]
pub struct UniverseAnalysis {
    pub name: String,
    /// Tickers left out because their history starts after the training start.
    pub excluded: Vec<String>,
    /// Unparseable rows dropped per ticker (only tickers with drops).
    pub dropped_rows: Vec<(String, usize)>,
    /// Index weight annotation per kept ticker, in panel order.
    pub index_weights: Vec<Option<f64>>,
    pub train: AlignedReturnPanel,
    pub test: AlignedReturnPanel,
    pub stats: Vec<AssetStats>,
    pub result: OptimizationResult,
    pub reports: Vec<BacktestReport>,
    pub summary: SummaryRow,
}

impl UniverseAnalysis {
    pub fn tickers(&self) -> &[String] {
        self.train.tickers()
    }

    pub fn report(&self, objective: Objective, window: Window) -> Option<&BacktestReport> {
        self.reports
            .iter()
            .find(|r| r.objective == objective && r.window == window)
    }
}

pub fn analyze_universe(spec: &UniverseSpec, settings: &RunSettings) -> Result<UniverseAnalysis> {
    if spec.assets.len() < 2 {
        return Err(Error::UniverseTooSmall(spec.assets.len()));
    }
    let mut series = Vec::with_capacity(spec.assets.len());
    let mut dropped_rows = Vec::new();
    for asset in &spec.assets {
        let loaded = market_data::load_prices(&asset.path, &asset.ticker)?;
        if loaded.dropped_rows > 0 {
            dropped_rows.push((asset.ticker.clone(), loaded.dropped_rows));
        }
        series.push(loaded.series);
    }
    let mut analysis = analyze_series(&spec.name, series, settings)?;
    analysis.dropped_rows = dropped_rows;
    analysis.index_weights = analysis
        .tickers()
        .iter()
        .map(|t| {
            spec.assets
                .iter()
                .find(|a| &a.ticker == t)
                .and_then(|a| a.index_weight)
        })
        .collect();
    Ok(analysis)
}

/// Runs the pipeline on already-loaded price histories.
pub fn analyze_series(
    name: &str,
    series: Vec<PriceSeries>,
    settings: &RunSettings,
) -> Result<UniverseAnalysis> {
    settings.split.validate()?;
    settings.search.validate()?;

    let (kept, excluded) = market_data::filter_full_history(series, settings.split.train_start);
    for ticker in &excluded {
        warn!(
            "{name}: excluding {ticker}, history starts after {}",
            settings.split.train_start
        );
    }
    if kept.len() < 2 {
        return Err(Error::UniverseTooSmall(kept.len()));
    }

    let panel = market_data::align(&kept)?;
    let (train, test) = market_data::split(&panel, &settings.split)?;
    info!(
        "{name}: {} assets, {} training days, {} test days",
        train.num_assets(),
        train.num_days(),
        test.num_days()
    );

    let params = settings.search.params;
    let stats = metrics::panel_stats(&train, params.annualization)?;
    let cov = metrics::covariance(&train)?;
    let evaluator = Evaluator::new(&train, &stats, &cov, params)?;
    let result = optimizer::generate(&evaluator, &settings.search)?;
    if result.selections.iter().all(|s| s.best.is_none()) {
        return Err(Error::NoSelection {
            universe: name.to_string(),
        });
    }

    let mut reports = Vec::new();
    for objective in Objective::ALL {
        let Some(best) = result.best(objective) else {
            continue;
        };
        for (window, window_panel) in [(Window::Train, &train), (Window::Test, &test)] {
            reports.push(backtest::run_backtest(
                window_panel,
                &best.weights,
                objective,
                window,
                settings.mode,
            )?);
        }
    }
    let summary = backtest::summarize(&reports, &result)?;

    Ok(UniverseAnalysis {
        name: name.to_string(),
        excluded,
        dropped_rows: Vec::new(),
        index_weights: vec![None; train.num_assets()],
        train,
        test,
        stats,
        result,
        reports,
        summary,
    })
}
