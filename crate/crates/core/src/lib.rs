//! Ratio-maximizing stock portfolios by Monte Carlo search over the weight
//! simplex.
//!
//! The pipeline loads adjusted-close histories, aligns them on a common
//! calendar, scores random long-only portfolios on the training window by
//! Sharpe, Sortino and Calmar ratio, and compares the selected portfolios by
//! cumulative return on the training and test windows.

pub mod backtest;
pub mod error;
pub mod manifest;
pub mod market_data;
pub mod metrics;
pub mod optimizer;
pub mod pipeline;
pub mod portfolio;
pub mod report;

pub use backtest::{BacktestReport, SummaryRow, Window};
pub use error::{Error, Result};
pub use manifest::{AssetEntry, Manifest, UniverseSpec};
pub use market_data::{AlignedReturnPanel, PricePoint, PriceSeries, SplitSpec};
pub use metrics::{AssetStats, CovarianceMatrix, CumulativeMode, DrawdownStats};
pub use optimizer::{Candidate, OptimizationResult, SamplingScheme, SearchConfig, Selection};
pub use pipeline::{RunSettings, UniverseAnalysis};
pub use portfolio::{EvaluationParams, Evaluator, Objective, PortfolioMetrics, Ratio, RiskAxis, Weights};
