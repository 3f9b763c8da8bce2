//! Cumulative-return evaluation of fixed weights over a window, and the
//! cross-objective summary.

use std::fmt;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market_data::AlignedReturnPanel;
use crate::metrics::{self, CumulativeMode};
use crate::optimizer::OptimizationResult;
use crate::portfolio::{self, Objective, Weights};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    Train,
    Test,
}

impl Window {
    pub const BOTH: [Window; 2] = [Window::Train, Window::Test];

    pub fn name(self) -> &'static str {
        match self {
            Window::Train => "train",
            Window::Test => "test",
        }
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BacktestReport {
    pub objective: Objective,
    pub window: Window,
    pub mode: CumulativeMode,
    pub cumulative_return: f64,
    pub curve: Vec<(NaiveDate, f64)>,
}

/// Applies fixed `weights` to every day of `panel` (no drift between
/// rebalances) and accumulates the resulting daily stream.
pub fn run_backtest(
    panel: &AlignedReturnPanel,
    weights: &Weights,
    objective: Objective,
    window: Window,
    mode: CumulativeMode,
) -> Result<BacktestReport> {
    let stream = portfolio::portfolio_daily_returns(panel, weights)?;
    if stream.is_empty() {
        return Err(Error::TooShort { needed: 1, got: 0 });
    }
    let values = metrics::cumulative_curve(&stream, mode);
    let cumulative_return = *values.last().expect("nonempty stream");
    Ok(BacktestReport {
        objective,
        window,
        mode,
        cumulative_return,
        curve: panel.dates().iter().copied().zip(values).collect(),
    })
}

/// One row of the cross-objective comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SummaryRow {
    pub best_train: Option<Objective>,
    pub best_test: Option<Objective>,
    pub max_sharpe: Option<f64>,
    pub max_sortino: Option<f64>,
    pub max_calmar: Option<f64>,
}

impl SummaryRow {
    pub fn max_ratio(&self, objective: Objective) -> Option<f64> {
        match objective {
            Objective::Sharpe => self.max_sharpe,
            Objective::Sortino => self.max_sortino,
            Objective::Calmar => self.max_calmar,
        }
    }

    pub fn best(&self, window: Window) -> Option<Objective> {
        match window {
            Window::Train => self.best_train,
            Window::Test => self.best_test,
        }
    }
}

/// Picks, per window, the objective whose portfolio had the highest
/// cumulative return (ties go to the earlier objective), and copies the
/// max-ratio values from the training optimization.
///
/// Every objective that has a selected portfolio must have a report for both
/// windows; objectives without one are left out of the comparison.
pub fn summarize(reports: &[BacktestReport], training: &OptimizationResult) -> Result<SummaryRow> {
    let find = |objective, window| {
        reports
            .iter()
            .find(|r| r.objective == objective && r.window == window)
    };
    let selected: Vec<Objective> = Objective::ALL
        .into_iter()
        .filter(|&o| training.best(o).is_some())
        .collect();

    let mut best = [None, None];
    for (slot, window) in best.iter_mut().zip(Window::BOTH) {
        let mut top: Option<(Objective, f64)> = None;
        for &objective in &selected {
            let report = find(objective, window).ok_or(Error::MissingReport { objective, window })?;
            if top.is_none_or(|(_, v)| report.cumulative_return > v) {
                top = Some((objective, report.cumulative_return));
            }
        }
        *slot = top.map(|(o, _)| o);
    }

    Ok(SummaryRow {
        best_train: best[0],
        best_test: best[1],
        max_sharpe: training.best_ratio(Objective::Sharpe),
        max_sortino: training.best_ratio(Objective::Sortino),
        max_calmar: training.best_ratio(Objective::Calmar),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::DrawdownStats;
    use crate::optimizer::{Candidate, Selection};
    use crate::portfolio::{PortfolioMetrics, Ratio};
    use proptest::prelude::*;

    fn tickers(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("A{i}")).collect()
    }

    fn panel(columns: &[Vec<f64>]) -> AlignedReturnPanel {
        let t = columns[0].len();
        let start = NaiveDate::from_ymd_opt(2021, 1, 1).unwrap();
        let dates = (0..t).map(|i| start + chrono::Days::new(i as u64)).collect();
        let rows = (0..t).map(|r| columns.iter().map(|c| c[r]).collect()).collect();
        AlignedReturnPanel::new(tickers(columns.len()), dates, rows).unwrap()
    }

    #[test]
    fn one_hot_arithmetic_curve() {
        let p = panel(&[vec![0.01, -0.01], vec![0.05, 0.05]]);
        let w = Weights::one_hot(tickers(2), 0).unwrap();
        let r = run_backtest(&p, &w, Objective::Sharpe, Window::Train, CumulativeMode::Arithmetic).unwrap();
        assert_eq!(r.curve.len(), 2);
        assert_eq!(r.curve[0].1, 0.01);
        assert_eq!(r.curve[1].1, 0.0);
        assert_eq!(r.cumulative_return, 0.0);
        assert_eq!(r.curve.iter().map(|c| c.0).collect::<Vec<_>>(), p.dates());
    }

    #[test]
    fn offsetting_assets_cancel() {
        let a = vec![0.01, -0.03, 0.02, 0.005];
        let b: Vec<f64> = a.iter().map(|x| -x).collect();
        let p = panel(&[a, b]);
        let w = Weights::equal(tickers(2)).unwrap();
        let r = run_backtest(&p, &w, Objective::Sharpe, Window::Test, CumulativeMode::Arithmetic).unwrap();
        assert_eq!(r.cumulative_return, 0.0);
    }

    #[test]
    fn matches_double_sum_oracle() {
        let cols = vec![
            vec![0.012, -0.004, 0.007, 0.021, -0.013],
            vec![-0.003, 0.009, 0.011, -0.017, 0.002],
            vec![0.000, 0.014, -0.008, 0.005, 0.019],
        ];
        let w = Weights::new(tickers(3), vec![0.25, 0.45, 0.3]).unwrap();
        let r = run_backtest(&panel(&cols), &w, Objective::Calmar, Window::Train, CumulativeMode::Arithmetic).unwrap();
        let mut oracle = 0.0;
        for t in 0..5 {
            for i in 0..3 {
                oracle += w.values()[i] * cols[i][t];
            }
        }
        assert!((r.cumulative_return - oracle).abs() < 1e-12);
        assert_eq!(r.curve.last().unwrap().1, r.cumulative_return);
    }

    #[test]
    fn rejects_mismatched_universe() {
        let p = panel(&[vec![0.01], vec![0.02]]);
        let w = Weights::equal(vec!["X".into(), "Y".into()]).unwrap();
        assert!(run_backtest(&p, &w, Objective::Sharpe, Window::Train, CumulativeMode::Arithmetic).is_err());
    }

    fn training(best: [Option<f64>; 3]) -> OptimizationResult {
        let metrics = |ratios: [Ratio; 3]| PortfolioMetrics {
            annual_return: 0.1,
            annual_volatility: 0.1,
            downside_deviation: Some(0.1),
            max_drawdown: 0.1,
            drawdown: DrawdownStats {
                max_drawdown: 0.1,
                peak_index: 0,
                trough_index: 1,
            },
            sharpe: ratios[0],
            sortino: ratios[1],
            calmar: ratios[2],
        };
        let mut candidates = Vec::new();
        let mut selections = Vec::new();
        for (k, o) in Objective::ALL.into_iter().enumerate() {
            let mut ratios = [Ratio::Valid(0.0); 3];
            if let Some(v) = best[k] {
                ratios[k] = Ratio::Valid(v);
            }
            candidates.push(Candidate {
                index: k,
                weights: Weights::equal(tickers(2)).unwrap(),
                metrics: metrics(ratios),
            });
            selections.push(Selection {
                objective: o,
                best: best[k].map(|_| k),
                min_risk: Some(k),
                frontier: vec![k],
            });
        }
        OptimizationResult {
            candidates,
            selections,
            diagnostics: vec![],
        }
    }

    fn reports(train: [f64; 3], test: [f64; 3]) -> Vec<BacktestReport> {
        let mut out = Vec::new();
        for (k, o) in Objective::ALL.into_iter().enumerate() {
            for (w, v) in [(Window::Train, train[k]), (Window::Test, test[k])] {
                out.push(BacktestReport {
                    objective: o,
                    window: w,
                    mode: CumulativeMode::Arithmetic,
                    cumulative_return: v,
                    curve: vec![],
                });
            }
        }
        out
    }

    #[test]
    fn summary_picks_highest_cumulative_return() {
        let t = training([Some(0.8417), Some(0.1970), Some(0.1183)]);
        let row = summarize(&reports([0.1518, 0.0923, 0.1341], [0.0698, 0.0239, 0.1063]), &t).unwrap();
        assert_eq!(row.best_train, Some(Objective::Sharpe));
        assert_eq!(row.best_test, Some(Objective::Calmar));
        assert_eq!(row.max_sharpe, Some(0.8417));
        assert_eq!(row.max_sortino, Some(0.1970));
        assert_eq!(row.max_calmar, Some(0.1183));
    }

    #[test]
    fn summary_ties_go_to_sharpe() {
        let t = training([Some(1.0), Some(1.0), Some(1.0)]);
        let row = summarize(&reports([0.1; 3], [0.2; 3]), &t).unwrap();
        assert_eq!(row.best_train, Some(Objective::Sharpe));
        assert_eq!(row.best_test, Some(Objective::Sharpe));
    }

    #[test]
    fn summary_requires_every_selected_report() {
        let t = training([Some(1.0), Some(1.0), Some(1.0)]);
        let mut r = reports([0.1; 3], [0.2; 3]);
        r.retain(|x| !(x.objective == Objective::Calmar && x.window == Window::Test));
        assert!(matches!(
            summarize(&r, &t),
            Err(Error::MissingReport {
                objective: Objective::Calmar,
                window: Window::Test
            })
        ));
    }

    #[test]
    fn summary_skips_unselected_objectives() {
        let t = training([Some(1.0), None, Some(0.5)]);
        let mut r = reports([0.1, 9.0, 0.3], [0.2, 9.0, 0.1]);
        r.retain(|x| x.objective != Objective::Sortino);
        let row = summarize(&r, &t).unwrap();
        assert_eq!(row.best_train, Some(Objective::Calmar));
        assert_eq!(row.best_test, Some(Objective::Sharpe));
        assert_eq!(row.max_sortino, None);
    }

    proptest! {
        #[test]
        fn summary_matches_brute_force_max(
            train in prop::array::uniform3(-1.0f64..1.0),
            test in prop::array::uniform3(-1.0f64..1.0),
        ) {
            let t = training([Some(1.0), Some(1.0), Some(1.0)]);
            let row = summarize(&reports(train, test), &t).unwrap();
            for (vals, got) in [(train, row.best_train), (test, row.best_test)] {
                let max = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let first = vals.iter().position(|v| *v == max).unwrap();
                prop_assert_eq!(got, Some(Objective::ALL[first]));
            }
        }

        #[test]
        fn arithmetic_curves_concatenate(
            a in prop::collection::vec(-0.05f64..0.05, 2..40),
            b in prop::collection::vec(-0.05f64..0.05, 2..40),
        ) {
            let cut = a.len();
            let mut both = a.clone();
            both.extend(&b);
            let other: Vec<f64> = both.iter().map(|x| x * 0.5).collect();
            let full = panel(&[both.clone(), other.clone()]);
            let first = panel(&[both[..cut].to_vec(), other[..cut].to_vec()]);
            let second = panel(&[both[cut..].to_vec(), other[cut..].to_vec()]);
            let w = Weights::new(tickers(2), vec![0.3, 0.7]).unwrap();
            let run = |p: &AlignedReturnPanel| {
                run_backtest(p, &w, Objective::Sharpe, Window::Train, CumulativeMode::Arithmetic).unwrap()
            };
            let (f, x, y) = (run(&full), run(&first), run(&second));
            let offset = x.cumulative_return;
            let joined: Vec<f64> = x.curve.iter().map(|c| c.1)
                .chain(y.curve.iter().map(|c| c.1 + offset))
                .collect();
            for (u, v) in joined.iter().zip(f.curve.iter().map(|c| c.1)) {
                prop_assert!((u - v).abs() < 1e-12);
            }
        }
    }
}
