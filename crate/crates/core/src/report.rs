//! Rendering of analysis results into CSV, JSON and SVG artifacts.
//!
//! Output layout for a run:
//!
//! ```text
//! <out>/summary.csv, summary.json          one row per universe
//! <out>/<universe>/weights.csv             ticker x objective weights
//! <out>/<universe>/max_ratios.csv          selected and min-risk portfolios
//! <out>/<universe>/candidates.csv          full candidate cloud
//! <out>/<universe>/frontier_<obj>.csv      efficient frontier per objective
//! <out>/<universe>/cumulative.csv          train/test cumulative returns
//! <out>/<universe>/curve_<obj>_<win>.csv   daily cumulative-return curves
//! <out>/<universe>/frontier_<obj>.svg      candidate scatter per objective
//! ```
//!
//! Table values (weights, ratios, cumulative returns) carry 4 decimals; plot
//! data (candidate cloud, frontiers, curves) carries 6. Rendering is a pure
//! function of the analyses, so identical inputs give identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::backtest::Window;
use crate::error::{Error, Result};
use crate::optimizer::Selection;
use crate::pipeline::UniverseAnalysis;
use crate::portfolio::{Objective, Ratio};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    /// Relative to the output directory.
    pub path: PathBuf,
    pub contents: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Optimize,
    Backtest,
    Frontier,
}

impl Stage {
    pub const ALL: [Stage; 3] = [Stage::Optimize, Stage::Backtest, Stage::Frontier];
}

/// Fixed-point with `decimals` places; never prints `-0.0000`.
pub fn fixed(x: f64, decimals: usize) -> String {
    let s = format!("{x:.decimals$}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

fn table(x: f64) -> String {
    fixed(x, 4)
}

fn plot(x: f64) -> String {
    fixed(x, 6)
}

fn opt_table(x: Option<f64>) -> String {
    x.map(table).unwrap_or_default()
}

fn ratio_cell(r: Ratio) -> String {
    r.value().map(plot).unwrap_or_default()
}

fn round4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

pub fn render(analyses: &[UniverseAnalysis], stages: &[Stage]) -> Vec<Artifact> {
    let mut out = Vec::new();
    let mut add = |path: PathBuf, contents: String| out.push(Artifact { path, contents });
    for a in analyses {
        let dir = PathBuf::from(&a.name);
        if stages.contains(&Stage::Optimize) {
            add(dir.join("weights.csv"), weights_csv(a));
            add(dir.join("max_ratios.csv"), max_ratios_csv(a));
            add(dir.join("candidates.csv"), candidates_csv(a));
            for s in &a.result.selections {
                add(dir.join(format!("frontier_{}.csv", s.objective)), frontier_csv(a, s));
            }
        }
        if stages.contains(&Stage::Backtest) {
            add(dir.join("cumulative.csv"), cumulative_csv(a));
            for r in &a.reports {
                add(dir.join(format!("curve_{}_{}.csv", r.objective, r.window)), curve_csv(r));
            }
        }
        if stages.contains(&Stage::Frontier) {
            for s in &a.result.selections {
                if let Some(svg) = frontier_svg(a, s) {
                    add(dir.join(format!("frontier_{}.svg", s.objective)), svg);
                }
            }
        }
    }
    if stages.contains(&Stage::Backtest) {
        add(PathBuf::from("summary.csv"), summary_csv(analyses));
        add(PathBuf::from("summary.json"), summary_json(analyses));
    }
    out
}

/// One row per ticker, one column per objective. Objectives without a
/// selected portfolio get empty cells.
pub fn weights_csv(a: &UniverseAnalysis) -> String {
    let mut s = String::from("ticker,max_sharpe,max_sortino,max_calmar\n");
    for (i, ticker) in a.tickers().iter().enumerate() {
        s.push_str(ticker);
        for o in Objective::ALL {
            s.push(',');
            if let Some(c) = a.result.best(o) {
                s.push_str(&table(c.weights.values()[i]));
            }
        }
        s.push('\n');
    }
    s
}

pub fn max_ratios_csv(a: &UniverseAnalysis) -> String {
    let mut s = String::from("objective,best_index,max_ratio,annual_return,risk,min_risk_index,min_risk_return,min_risk\n");
    for sel in &a.result.selections {
        let axis = sel.objective.risk_axis();
        let best = sel.best.map(|i| &a.result.candidates[i]);
        let low = sel.min_risk.map(|i| &a.result.candidates[i]);
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            sel.objective,
            sel.best.map(|i| i.to_string()).unwrap_or_default(),
            opt_table(best.and_then(|c| c.metrics.ratio(sel.objective).value())),
            opt_table(best.map(|c| c.metrics.annual_return)),
            opt_table(best.and_then(|c| c.metrics.risk(axis))),
            sel.min_risk.map(|i| i.to_string()).unwrap_or_default(),
            opt_table(low.map(|c| c.metrics.annual_return)),
            opt_table(low.and_then(|c| c.metrics.risk(axis))),
        );
    }
    s
}

pub fn candidates_csv(a: &UniverseAnalysis) -> String {
    let mut s = String::from("index");
    for t in a.tickers() {
        let _ = write!(s, ",w_{t}");
    }
    s.push_str(",annual_return,annual_volatility,downside_deviation,max_drawdown,sharpe,sortino,calmar\n");
    for c in &a.result.candidates {
        let _ = write!(s, "{}", c.index);
        for w in c.weights.values() {
            let _ = write!(s, ",{}", plot(*w));
        }
        let m = &c.metrics;
        let _ = writeln!(
            s,
            ",{},{},{},{},{},{},{}",
            plot(m.annual_return),
            plot(m.annual_volatility),
            m.downside_deviation.map(plot).unwrap_or_default(),
            plot(m.max_drawdown),
            ratio_cell(m.sharpe),
            ratio_cell(m.sortino),
            ratio_cell(m.calmar),
        );
    }
    s
}

pub fn frontier_csv(a: &UniverseAnalysis, sel: &Selection) -> String {
    let axis = sel.objective.risk_axis();
    let mut s = String::from("index,risk,annual_return,ratio\n");
    for &i in &sel.frontier {
        let m = &a.result.candidates[i].metrics;
        let _ = writeln!(
            s,
            "{},{},{},{}",
            i,
            m.risk(axis).map(plot).unwrap_or_default(),
            plot(m.annual_return),
            ratio_cell(m.ratio(sel.objective)),
        );
    }
    s
}

/// Train/test cumulative return per objective.
pub fn cumulative_csv(a: &UniverseAnalysis) -> String {
    let mut s = String::from("period,max_sharpe,max_sortino,max_calmar\n");
    for w in Window::BOTH {
        s.push_str(w.name());
        for o in Objective::ALL {
            s.push(',');
            if let Some(r) = a.report(o, w) {
                s.push_str(&table(r.cumulative_return));
            }
        }
        s.push('\n');
    }
    s
}

pub fn curve_csv(r: &crate::backtest::BacktestReport) -> String {
    let mut s = String::from("date,cumulative_return\n");
    for (d, v) in &r.curve {
        let _ = writeln!(s, "{},{}", d.format("%Y-%m-%d"), plot(*v));
    }
    s
}

pub fn summary_csv(analyses: &[UniverseAnalysis]) -> String {
    let mut s = String::from("universe,best_train,best_test,max_sharpe,max_sortino,max_calmar\n");
    for a in analyses {
        let row = &a.summary;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            a.name,
            row.best_train.map(Objective::title).unwrap_or_default(),
            row.best_test.map(Objective::title).unwrap_or_default(),
            opt_table(row.max_sharpe),
            opt_table(row.max_sortino),
            opt_table(row.max_calmar),
        );
    }
    s
}

#[derive(Serialize)]
struct SummaryDoc<'a> {
    universes: Vec<UniverseDoc<'a>>,
}

#[derive(Serialize)]
struct UniverseDoc<'a> {
    name: &'a str,
    tickers: &'a [String],
    index_weights: &'a [Option<f64>],
    excluded: &'a [String],
    dropped_rows: Vec<DroppedDoc<'a>>,
    train_days: usize,
    test_days: usize,
    best_train: Option<Objective>,
    best_test: Option<Objective>,
    max_sharpe: Option<f64>,
    max_sortino: Option<f64>,
    max_calmar: Option<f64>,
    cumulative_returns: Vec<CumulativeDoc>,
    diagnostics: &'a [String],
}

#[derive(Serialize)]
struct DroppedDoc<'a> {
    ticker: &'a str,
    rows: usize,
}

#[derive(Serialize)]
struct CumulativeDoc {
    objective: Objective,
    window: Window,
    cumulative_return: f64,
}

pub fn summary_json(analyses: &[UniverseAnalysis]) -> String {
    let doc = SummaryDoc {
        universes: analyses
            .iter()
            .map(|a| UniverseDoc {
                name: &a.name,
                tickers: a.tickers(),
                index_weights: &a.index_weights,
                excluded: &a.excluded,
                dropped_rows: a
                    .dropped_rows
                    .iter()
                    .map(|(ticker, rows)| DroppedDoc { ticker, rows: *rows })
                    .collect(),
                train_days: a.train.num_days(),
                test_days: a.test.num_days(),
                best_train: a.summary.best_train,
                best_test: a.summary.best_test,
                max_sharpe: a.summary.max_sharpe.map(round4),
                max_sortino: a.summary.max_sortino.map(round4),
                max_calmar: a.summary.max_calmar.map(round4),
                cumulative_returns: a
                    .reports
                    .iter()
                    .map(|r| CumulativeDoc {
                        objective: r.objective,
                        window: r.window,
                        cumulative_return: round4(r.cumulative_return),
                    })
                    .collect(),
                diagnostics: &a.result.diagnostics,
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("summary serializes");
    s.push('\n');
    s
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 72.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 56.0;
const TICKS: usize = 5;

fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let span = hi - lo;
    if span > 0.0 {
        (lo - 0.05 * span, hi + 0.05 * span)
    } else {
        let pad = if lo.abs() > 0.0 { lo.abs() * 0.1 } else { 0.5 };
        (lo - pad, hi + pad)
    }
}

fn px(x: f64) -> String {
    fixed(x, 2)
}

/// Scatter of every candidate in (risk, annual return) space with the
/// frontier traced, the min-risk portfolio in blue and the max-ratio
/// portfolio in red. `None` if no candidate has a defined risk on the axis.
pub fn frontier_svg(a: &UniverseAnalysis, sel: &Selection) -> Option<String> {
    let axis = sel.objective.risk_axis();
    let points: Vec<(usize, f64, f64)> = a
        .result
        .candidates
        .iter()
        .enumerate()
        .filter_map(|(i, c)| c.metrics.risk(axis).map(|r| (i, r, c.metrics.annual_return)))
        .collect();
    if points.is_empty() {
        return None;
    }
    let (x0, x1) = padded_range(points.iter().map(|p| p.1));
    let (y0, y1) = padded_range(points.iter().map(|p| p.2));
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * (WIDTH - LEFT - RIGHT);
    let sy = |y: f64| HEIGHT - BOTTOM - (y - y0) / (y1 - y0) * (HEIGHT - TOP - BOTTOM);
    let point = |i: usize| {
        let m = &a.result.candidates[i].metrics;
        (sx(m.risk(axis).unwrap_or(x0)), sy(m.annual_return))
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif">"#,
        w = WIDTH,
        h = HEIGHT
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}: maximum {} ratio portfolio</text>"#,
        px(WIDTH / 2.0),
        a.name,
        sel.objective.title()
    );

    let (left, right, top, bottom) = (LEFT, WIDTH - RIGHT, TOP, HEIGHT - BOTTOM);
    let _ = writeln!(s, r#"<g class="axes" stroke="black" stroke-width="1">"#);
    let _ = writeln!(s, r#"<line x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}"/>"#);
    let _ = writeln!(s, r#"<line x1="{left}" y1="{top}" x2="{left}" y2="{bottom}"/>"#);
    s.push_str("</g>\n");
    let _ = writeln!(s, r#"<g class="ticks" font-size="11" fill="black">"#);
    for k in 0..TICKS {
        let f = k as f64 / (TICKS - 1) as f64;
        let xv = x0 + f * (x1 - x0);
        let yv = y0 + f * (y1 - y0);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            px(sx(xv)),
            px(bottom + 16.0),
            fixed(xv, 3)
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            px(left - 6.0),
            px(sy(yv) + 4.0),
            fixed(yv, 3)
        );
    }
    s.push_str("</g>\n");
    let _ = writeln!(
        s,
        r#"<text class="x-label" x="{}" y="{}" text-anchor="middle" font-size="13">{}</text>"#,
        px((left + right) / 2.0),
        px(HEIGHT - 16.0),
        axis.label()
    );
    let _ = writeln!(
        s,
        r#"<text class="y-label" x="18" y="{y}" text-anchor="middle" font-size="13" transform="rotate(-90 18 {y})">Annual return</text>"#,
        y = px((top + bottom) / 2.0)
    );

    let _ = writeln!(s, r##"<g class="candidates" fill="#808080" fill-opacity="0.45">"##);
    for &(_, r, ret) in &points {
        let _ = writeln!(s, r#"<circle cx="{}" cy="{}" r="1.5"/>"#, px(sx(r)), px(sy(ret)));
    }
    s.push_str("</g>\n");

    if sel.frontier.len() > 1 {
        let path: Vec<String> = sel
            .frontier
            .iter()
            .map(|&i| {
                let (x, y) = point(i);
                format!("{},{}", px(x), px(y))
            })
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline class="frontier" fill="none" stroke="black" stroke-width="1" points="{}"/>"#,
            path.join(" ")
        );
    }
    if let Some(i) = sel.min_risk {
        let (x, y) = point(i);
        let _ = writeln!(
            s,
            r#"<circle class="min-risk" cx="{}" cy="{}" r="6" fill="blue" stroke="black"/>"#,
            px(x),
            px(y)
        );
    }
    if let Some(i) = sel.best {
        let (x, y) = point(i);
        let _ = writeln!(
            s,
            r#"<circle class="max-ratio" cx="{}" cy="{}" r="6" fill="red" stroke="black"/>"#,
            px(x),
            px(y)
        );
    }
    s.push_str("</svg>\n");
    Some(s)
}

/// Writes every artifact under `out`, creating directories as needed. If any
/// write fails, the files written by this call are removed again.
pub fn write_artifacts(out: &Path, artifacts: &[Artifact]) -> Result<()> {
    let mut written: Vec<PathBuf> = Vec::new();
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| Error::Io { path, source }
    };
    let result = (|| {
        for artifact in artifacts {
            let target = out.join(&artifact.path);
            if let Some(parent) = target.parent() {
                fs::create_dir_all(parent).map_err(io(parent))?;
            }
            fs::write(&target, &artifact.contents).map_err(io(&target))?;
            written.push(target);
        }
        Ok(())
    })();
    if result.is_err() {
        for path in &written {
            let _ = fs::remove_file(path);
        }
    }
    result
}
