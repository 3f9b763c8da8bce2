//! Return-stream statistics: annualized mean and volatility, sample
//! covariance, downside deviation, drawdown and cumulative return.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market_data::AlignedReturnPanel;

/// Trading days per year.
pub const DEFAULT_ANNUALIZATION: f64 = 252.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssetStats {
    pub ticker: String,
    pub mean_daily_return: f64,
    pub daily_volatility: f64,
    pub annual_return: f64,
    pub annual_volatility: f64,
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Variance with an `n - 1` denominator. Needs at least two values.
pub fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

pub fn check_annualization(factor: f64) -> Result<()> {
    if factor > 0.0 && factor.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "annualization factor must be positive, got {factor}"
        )))
    }
}

pub fn asset_stats(ticker: &str, returns: &[f64], annualization: f64) -> Result<AssetStats> {
    check_annualization(annualization)?;
    if returns.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: returns.len(),
        });
    }
    let mean_daily_return = mean(returns);
    let daily_volatility = sample_variance(returns).sqrt();
    Ok(AssetStats {
        ticker: ticker.to_string(),
        mean_daily_return,
        daily_volatility,
        annual_return: mean_daily_return * annualization,
        annual_volatility: daily_volatility * annualization.sqrt(),
    })
}

/// [`asset_stats`] for every column of the panel.
pub fn panel_stats(panel: &AlignedReturnPanel, annualization: f64) -> Result<Vec<AssetStats>> {
    panel
        .tickers()
        .iter()
        .enumerate()
        .map(|(i, t)| asset_stats(t, &panel.column(i), annualization))
        .collect()
}

/// Daily sample covariance matrix, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    tickers: Vec<String>,
    values: Vec<f64>,
}

impl CovarianceMatrix {
    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn dim(&self) -> usize {
        self.tickers.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.dim() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.dim();
        &self.values[i * n..(i + 1) * n]
    }
}

pub fn covariance(panel: &AlignedReturnPanel) -> Result<CovarianceMatrix> {
    let t = panel.num_days();
    if t < 2 {
        return Err(Error::TooShort { needed: 2, got: t });
    }
    let n = panel.num_assets();
    let columns: Vec<Vec<f64>> = (0..n).map(|i| panel.column(i)).collect();
    let means: Vec<f64> = columns.iter().map(|c| mean(c)).collect();
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let s: f64 = columns[i]
                .iter()
                .zip(&columns[j])
                .map(|(x, y)| (x - means[i]) * (y - means[j]))
                .sum();
            let c = s / (t - 1) as f64;
            values[i * n + j] = c;
            values[j * n + i] = c;
        }
    }
    Ok(CovarianceMatrix {
        tickers: panel.tickers().to_vec(),
        values,
    })
}

/// Sample standard deviation of the strictly negative returns.
///
/// Fails with [`Error::InsufficientDownside`] when fewer than two returns are
/// negative.
pub fn downside_deviation(returns: &[f64]) -> Result<f64> {
    let negatives: Vec<f64> = returns.iter().copied().filter(|&r| r < 0.0).collect();
    if negatives.len() < 2 {
        return Err(Error::InsufficientDownside(negatives.len()));
    }
    Ok(sample_variance(&negatives).sqrt())
}

/// Compounded wealth starting at 1: `w[t] = w[t-1] * (1 + r[t])`.
pub fn wealth_curve(returns: &[f64]) -> Result<Vec<f64>> {
    if returns.is_empty() {
        return Err(Error::TooShort { needed: 1, got: 0 });
    }
    let mut wealth = Vec::with_capacity(returns.len() + 1);
    wealth.push(1.0);
    let mut level = 1.0;
    for (index, &r) in returns.iter().enumerate() {
        if r <= -1.0 {
            return Err(Error::WealthCollapse { index, value: r });
        }
        level *= 1.0 + r;
        wealth.push(level);
    }
    Ok(wealth)
}

/// Largest peak-to-trough loss of a wealth curve, with the curve indices of
/// the peak and trough.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DrawdownStats {
    pub max_drawdown: f64,
    pub peak_index: usize,
    pub trough_index: usize,
}

/// Single forward pass over a strictly positive wealth curve.
pub fn max_drawdown(wealth: &[f64]) -> DrawdownStats {
    debug_assert!(wealth.iter().all(|&w| w > 0.0));
    let mut stats = DrawdownStats {
        max_drawdown: 0.0,
        peak_index: 0,
        trough_index: 0,
    };
    let Some(&first) = wealth.first() else {
        return stats;
    };
    let mut peak = first;
    let mut peak_index = 0;
    for (t, &w) in wealth.iter().enumerate() {
        if w > peak {
            peak = w;
            peak_index = t;
        }
        let drawdown = (peak - w) / peak;
        if drawdown > stats.max_drawdown {
            stats = DrawdownStats {
                max_drawdown: drawdown,
                peak_index,
                trough_index: t,
            };
        }
    }
    stats
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CumulativeMode {
    /// Running sum of daily returns.
    #[default]
    Arithmetic,
    /// Running product of `1 + r`, minus one.
    Compounded,
}

impl fmt::Display for CumulativeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CumulativeMode::Arithmetic => "arithmetic",
            CumulativeMode::Compounded => "compounded",
        })
    }
}

impl FromStr for CumulativeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "arithmetic" => Ok(CumulativeMode::Arithmetic),
            "compounded" => Ok(CumulativeMode::Compounded),
            other => Err(Error::Config(format!(
                "unknown cumulative mode `{other}` (expected arithmetic or compounded)"
            ))),
        }
    }
}

/// Running cumulative return after each day.
pub fn cumulative_curve(returns: &[f64], mode: CumulativeMode) -> Vec<f64> {
    match mode {
        CumulativeMode::Arithmetic => returns
            .iter()
            .scan(0.0, |acc, r| {
                *acc += r;
                Some(*acc)
            })
            .collect(),
        CumulativeMode::Compounded => returns
            .iter()
            .scan(1.0, |acc, r| {
                *acc *= 1.0 + r;
                Some(*acc - 1.0)
            })
            .collect(),
    }
}

pub fn cumulative_return(returns: &[f64], mode: CumulativeMode) -> f64 {
    cumulative_curve(returns, mode).last().copied().unwrap_or(0.0)
}
