//! Portfolio-level return, risk and the Sharpe, Sortino and Calmar ratios.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market_data::AlignedReturnPanel;
use crate::metrics::{self, AssetStats, CovarianceMatrix, DrawdownStats};

/// Below this a volatility, downside deviation or drawdown counts as zero.
pub const RISK_EPSILON: f64 = 1e-12;

const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

/// Long-only allocation over an ordered universe.
#[derive(Debug, Clone, PartialEq)]
pub struct Weights {
    tickers: Vec<String>,
    values: Vec<f64>,
}

impl Weights {
    pub fn new(tickers: Vec<String>, values: Vec<f64>) -> Result<Self> {
        if tickers.len() != values.len() {
            return Err(Error::InvalidWeights(format!(
                "{} weights for {} tickers",
                values.len(),
                tickers.len()
            )));
        }
        if tickers.is_empty() {
            return Err(Error::InvalidWeights("empty universe".into()));
        }
        if let Some(w) = values.iter().find(|w| **w < 0.0 || !w.is_finite()) {
            return Err(Error::InvalidWeights(format!("weight {w} is negative or not finite")));
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::InvalidWeights(format!("weights sum to {sum}, not 1")));
        }
        Ok(Self { tickers, values })
    }

    pub fn one_hot(tickers: Vec<String>, asset: usize) -> Result<Self> {
        let mut values = vec![0.0; tickers.len()];
        if let Some(w) = values.get_mut(asset) {
            *w = 1.0;
        }
        Self::new(tickers, values)
    }

    pub fn equal(tickers: Vec<String>) -> Result<Self> {
        let n = tickers.len();
        Self::new(tickers, vec![1.0 / n as f64; n])
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub(crate) fn check_tickers(expected: &[String], got: &[String]) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::TickerMismatch {
            expected: expected.to_vec(),
            got: got.to_vec(),
        })
    }
}

/// The three ratios a candidate can be selected on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    Sharpe,
    Sortino,
    Calmar,
}

impl Objective {
    pub const ALL: [Objective; 3] = [Objective::Sharpe, Objective::Sortino, Objective::Calmar];

    pub fn name(self) -> &'static str {
        match self {
            Objective::Sharpe => "sharpe",
            Objective::Sortino => "sortino",
            Objective::Calmar => "calmar",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Objective::Sharpe => "Sharpe",
            Objective::Sortino => "Sortino",
            Objective::Calmar => "Calmar",
        }
    }

    /// Risk measure the ratio divides by.
    pub fn risk_axis(self) -> RiskAxis {
        match self {
            Objective::Sharpe => RiskAxis::Volatility,
            Objective::Sortino => RiskAxis::DownsideDeviation,
            Objective::Calmar => RiskAxis::Drawdown,
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Objective::ALL
            .into_iter()
            .find(|o| o.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown objective `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RiskAxis {
    Volatility,
    DownsideDeviation,
    Drawdown,
}

impl RiskAxis {
    pub fn label(self) -> &'static str {
        match self {
            RiskAxis::Volatility => "Annual volatility",
            RiskAxis::DownsideDeviation => "Annual downside deviation",
            RiskAxis::Drawdown => "Maximum drawdown",
        }
    }
}

/// Why a ratio has no value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InvalidReason {
    ZeroVolatility,
    InsufficientDownside,
    ZeroDownside,
    ZeroDrawdown,
}

/// A risk-adjusted ratio. Deliberately has no arithmetic: callers must
/// unwrap it through [`Ratio::value`] and handle the invalid case.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Ratio {
    Valid(f64),
    Invalid(InvalidReason),
}

impl Ratio {
    pub fn value(self) -> Option<f64> {
        match self {
            Ratio::Valid(v) => Some(v),
            Ratio::Invalid(_) => None,
        }
    }

    pub fn is_valid(self) -> bool {
        matches!(self, Ratio::Valid(_))
    }

    #[track_caller]
    pub fn expect_valid(self) -> f64 {
        match self {
            Ratio::Valid(v) => v,
            Ratio::Invalid(reason) => panic!("ratio is invalid: {reason:?}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PortfolioMetrics {
    pub annual_return: f64,
    pub annual_volatility: f64,
    /// Annualized; `None` when the stream has fewer than two losing days.
    pub downside_deviation: Option<f64>,
    pub max_drawdown: f64,
    pub drawdown: DrawdownStats,
    pub sharpe: Ratio,
    pub sortino: Ratio,
    pub calmar: Ratio,
}

impl PortfolioMetrics {
    pub fn ratio(&self, objective: Objective) -> Ratio {
        match objective {
            Objective::Sharpe => self.sharpe,
            Objective::Sortino => self.sortino,
            Objective::Calmar => self.calmar,
        }
    }

    pub fn risk(&self, axis: RiskAxis) -> Option<f64> {
        match axis {
            RiskAxis::Volatility => Some(self.annual_volatility),
            RiskAxis::DownsideDeviation => self.downside_deviation,
            RiskAxis::Drawdown => Some(self.max_drawdown),
        }
    }
}

/// `r_p[t] = sum_i w_i * r[t][i]`.
pub fn portfolio_daily_returns(panel: &AlignedReturnPanel, weights: &Weights) -> Result<Vec<f64>> {
    check_tickers(panel.tickers(), weights.tickers())?;
    Ok(panel
        .rows()
        .iter()
        .map(|row| dot(row, weights.values()))
        .collect())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn portfolio_annual_return(stats: &[AssetStats], weights: &Weights) -> Result<f64> {
    if stats.len() != weights.len() || stats.iter().zip(weights.tickers()).any(|(s, t)| &s.ticker != t) {
        return Err(Error::TickerMismatch {
            expected: stats.iter().map(|s| s.ticker.clone()).collect(),
            got: weights.tickers().to_vec(),
        });
    }
    Ok(stats
        .iter()
        .zip(weights.values())
        .map(|(s, w)| w * s.annual_return)
        .sum())
}

/// Annualized variance `A * w' S w` for the daily covariance `S`.
///
/// Round-off can push a zero variance slightly negative; anything below
/// `-1e-12` is reported as a broken covariance input, anything above is
/// clamped to zero.
pub fn portfolio_variance(cov: &CovarianceMatrix, weights: &Weights, annualization: f64) -> Result<f64> {
    check_tickers(cov.tickers(), weights.tickers())?;
    let w = weights.values();
    let quad: f64 = (0..cov.dim()).map(|i| w[i] * dot(cov.row(i), w)).sum();
    let variance = annualization * quad;
    if variance < -RISK_EPSILON {
        return Err(Error::NegativeVariance(variance));
    }
    Ok(variance.max(0.0))
}

pub fn sharpe(annual_return: f64, annual_volatility: f64, risk_free_rate: f64) -> Ratio {
    if annual_volatility < RISK_EPSILON {
        Ratio::Invalid(InvalidReason::ZeroVolatility)
    } else {
        Ratio::Valid((annual_return - risk_free_rate) / annual_volatility)
    }
}

/// `downside_annual` is `None` when there were too few losing days.
pub fn sortino(annual_return: f64, downside_annual: Option<f64>, risk_free_rate: f64) -> Ratio {
    match downside_annual {
        None => Ratio::Invalid(InvalidReason::InsufficientDownside),
        Some(dd) if dd < RISK_EPSILON => Ratio::Invalid(InvalidReason::ZeroDownside),
        Some(dd) => Ratio::Valid((annual_return - risk_free_rate) / dd),
    }
}

/// Raw annual return over maximum drawdown; no risk-free adjustment.
pub fn calmar(annual_return: f64, max_drawdown: f64) -> Ratio {
    if max_drawdown < RISK_EPSILON {
        Ratio::Invalid(InvalidReason::ZeroDrawdown)
    } else {
        Ratio::Valid(annual_return / max_drawdown)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvaluationParams {
    pub annualization: f64,
    pub risk_free_rate: f64,
    /// Measure drawdown over only the trailing this-many days of the stream.
    pub calmar_window: Option<usize>,
}

impl Default for EvaluationParams {
    fn default() -> Self {
        Self {
            annualization: metrics::DEFAULT_ANNUALIZATION,
            risk_free_rate: 0.0,
            calmar_window: None,
        }
    }
}

impl EvaluationParams {
    pub fn validate(&self) -> Result<()> {
        metrics::check_annualization(self.annualization)?;
        if self.risk_free_rate < 0.0 || !self.risk_free_rate.is_finite() {
            return Err(Error::Config(format!(
                "risk-free rate must be non-negative, got {}",
                self.risk_free_rate
            )));
        }
        if self.calmar_window == Some(0) {
            return Err(Error::Config("calmar window must be at least one day".into()));
        }
        Ok(())
    }
}

/// Read-only inputs shared by every candidate evaluation.
#[derive(Debug, Clone, Copy)]
pub struct Evaluator<'a> {
    panel: &'a AlignedReturnPanel,
    stats: &'a [AssetStats],
    cov: &'a CovarianceMatrix,
    params: EvaluationParams,
}

impl<'a> Evaluator<'a> {
    pub fn new(
        panel: &'a AlignedReturnPanel,
        stats: &'a [AssetStats],
        cov: &'a CovarianceMatrix,
        params: EvaluationParams,
    ) -> Result<Self> {
        params.validate()?;
        check_tickers(panel.tickers(), cov.tickers())?;
        let stat_tickers: Vec<String> = stats.iter().map(|s| s.ticker.clone()).collect();
        check_tickers(panel.tickers(), &stat_tickers)?;
        Ok(Self {
            panel,
            stats,
            cov,
            params,
        })
    }

    pub fn panel(&self) -> &'a AlignedReturnPanel {
        self.panel
    }

    pub fn params(&self) -> &EvaluationParams {
        &self.params
    }

    pub fn evaluate(&self, weights: &Weights) -> Result<PortfolioMetrics> {
        let a = self.params.annualization;
        let rf = self.params.risk_free_rate;
        let stream = portfolio_daily_returns(self.panel, weights)?;

        let annual_return = portfolio_annual_return(self.stats, weights)?;
        let annual_volatility = portfolio_variance(self.cov, weights, a)?.sqrt();

        let downside_deviation = match metrics::downside_deviation(&stream) {
            Ok(dd) => Some(dd * a.sqrt()),
            Err(Error::InsufficientDownside(_)) => None,
            Err(e) => return Err(e),
        };

        let tail = match self.params.calmar_window {
            Some(k) if k < stream.len() => &stream[stream.len() - k..],
            _ => &stream[..],
        };
        let drawdown = metrics::max_drawdown(&metrics::wealth_curve(tail)?);

        Ok(PortfolioMetrics {
            annual_return,
            annual_volatility,
            downside_deviation,
            max_drawdown: drawdown.max_drawdown,
            drawdown,
            sharpe: sharpe(annual_return, annual_volatility, rf),
            sortino: sortino(annual_return, downside_deviation, rf),
            calmar: calmar(annual_return, drawdown.max_drawdown),
        })
    }
}
