//! Seeded Monte Carlo search over the long-only weight simplex.
//!
//! Candidate `i` draws its weights from its own ChaCha stream `(seed, i)`, so
//! the candidate cloud does not depend on evaluation order or thread count,
//! and a run with `N` candidates is a prefix of a run with `N + k`.

use std::cmp::Ordering;

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::portfolio::{EvaluationParams, Evaluator, Objective, PortfolioMetrics, RiskAxis, Weights};

pub const DEFAULT_CANDIDATES: usize = 10_000;
pub const DEFAULT_SEED: u64 = 42;

const MAX_REDRAWS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingScheme {
    /// Independent uniforms divided by their sum.
    #[default]
    NormalizedUniform,
    /// Independent unit exponentials divided by their sum; uniform on the
    /// simplex.
    FlatDirichlet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub num_candidates: usize,
    pub seed: u64,
    pub params: EvaluationParams,
    pub objectives: Vec<Objective>,
    pub sampling: SamplingScheme,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            num_candidates: DEFAULT_CANDIDATES,
            seed: DEFAULT_SEED,
            params: EvaluationParams::default(),
            objectives: Objective::ALL.to_vec(),
            sampling: SamplingScheme::default(),
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_candidates == 0 {
            return Err(Error::Config("need at least one candidate".into()));
        }
        self.params.validate()
    }
}

/// Divides raw non-negative draws by their sum. `None` if they sum to zero.
pub fn normalize_draws(draws: &[f64]) -> Option<Vec<f64>> {
    let total: f64 = draws.iter().sum();
    (total > 0.0).then(|| draws.iter().map(|d| d / total).collect())
}

/// Draws one point of the simplex.
///
/// Always consumes `n` variates per attempt; an all-zero draw is retried a
/// bounded number of times.
pub fn sample_weights<R: Rng + ?Sized>(n: usize, rng: &mut R, scheme: SamplingScheme) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::UniverseTooSmall(n));
    }
    for _ in 0..MAX_REDRAWS {
        let draws: Vec<f64> = (0..n)
            .map(|_| {
                let u: f64 = rng.random();
                match scheme {
                    SamplingScheme::NormalizedUniform => u,
                    // 1 - u lies in (0, 1], so the log is finite
                    SamplingScheme::FlatDirichlet => -(1.0 - u).ln(),
                }
            })
            .collect();
        if let Some(w) = normalize_draws(&draws) {
            return Ok(w);
        }
    }
    Err(Error::DegenerateDraw(MAX_REDRAWS))
}

/// The RNG for candidate `index` under `seed`.
pub fn candidate_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Candidate {
    pub index: usize,
    #[serde(skip)]
    pub weights: Weights,
    pub metrics: PortfolioMetrics,
}

/// Selections made for one objective on the shared candidate cloud.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Selection {
    pub objective: Objective,
    pub best: Option<usize>,
    pub min_risk: Option<usize>,
    pub frontier: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    pub candidates: Vec<Candidate>,
    pub selections: Vec<Selection>,
    pub diagnostics: Vec<String>,
}

impl OptimizationResult {
    pub fn selection(&self, objective: Objective) -> Option<&Selection> {
        self.selections.iter().find(|s| s.objective == objective)
    }

    pub fn best(&self, objective: Objective) -> Option<&Candidate> {
        self.selection(objective)
            .and_then(|s| s.best)
            .map(|i| &self.candidates[i])
    }

    pub fn best_ratio(&self, objective: Objective) -> Option<f64> {
        self.best(objective)
            .and_then(|c| c.metrics.ratio(objective).value())
    }
}

/// Scores `config.num_candidates` random portfolios and selects, per
/// objective, the max-ratio candidate, the min-risk candidate and the
/// efficient frontier.
pub fn generate(evaluator: &Evaluator<'_>, config: &SearchConfig) -> Result<OptimizationResult> {
    config.validate()?;
    let tickers = evaluator.panel().tickers().to_vec();
    let n = tickers.len();
    let candidates = (0..config.num_candidates)
        .into_par_iter()
        .map(|index| {
            let mut rng = candidate_rng(config.seed, index);
            let values = sample_weights(n, &mut rng, config.sampling)?;
            let weights = Weights::new(tickers.clone(), values)?;
            let metrics = evaluator.evaluate(&weights)?;
            Ok(Candidate {
                index,
                weights,
                metrics,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut diagnostics = Vec::new();
    let selections = config
        .objectives
        .iter()
        .map(|&objective| {
            let axis = objective.risk_axis();
            let best = match select_max(&candidates, objective) {
                Ok(i) => Some(i),
                Err(e) => {
                    warn!("{e}");
                    diagnostics.push(e.to_string());
                    None
                }
            };
            Selection {
                objective,
                best,
                min_risk: select_min_risk(&candidates, axis),
                frontier: frontier(&candidates, axis),
            }
        })
        .collect();

    Ok(OptimizationResult {
        candidates,
        selections,
        diagnostics,
    })
}

/// Index of the largest valid ratio; ties go to the lowest index.
pub fn select_max(candidates: &[Candidate], objective: Objective) -> Result<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, c) in candidates.iter().enumerate() {
        if let Some(v) = c.metrics.ratio(objective).value() {
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((i, v));
            }
        }
    }
    best.map(|(i, _)| i).ok_or(Error::NoValidCandidate(objective))
}

/// Index of the smallest defined risk on `axis`; ties go to the lowest index.
pub fn select_min_risk(candidates: &[Candidate], axis: RiskAxis) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, c) in candidates.iter().enumerate() {
        if let Some(r) = c.metrics.risk(axis) {
            if best.is_none_or(|(_, b)| r < b) {
                best = Some((i, r));
            }
        }
    }
    best.map(|(i, _)| i)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskReturn {
    pub index: usize,
    pub risk: f64,
    pub ret: f64,
}

/// Pareto-efficient points under (lower risk, higher return), sorted by
/// risk ascending. Exact duplicates keep only their lowest index, so returns
/// strictly increase along the result.
pub fn efficient_frontier(points: &[RiskReturn]) -> Vec<usize> {
    let mut sorted: Vec<&RiskReturn> = points.iter().collect();
    sorted.sort_by(|a, b| {
        a.risk
            .total_cmp(&b.risk)
            .then_with(|| b.ret.total_cmp(&a.ret))
            .then_with(|| a.index.cmp(&b.index))
    });
    let mut out = Vec::new();
    let mut best_ret = f64::NEG_INFINITY;
    for p in sorted {
        if p.ret.partial_cmp(&best_ret) == Some(Ordering::Greater) {
            best_ret = p.ret;
            out.push(p.index);
        }
    }
    out
}

/// Efficient frontier of the candidates on `axis` against annual return.
/// Candidates with no defined risk on that axis are left out.
pub fn frontier(candidates: &[Candidate], axis: RiskAxis) -> Vec<usize> {
    let points: Vec<RiskReturn> = candidates
        .iter()
        .enumerate()
        .filter_map(|(i, c)| {
            c.metrics.risk(axis).map(|risk| RiskReturn {
                index: i,
                risk,
                ret: c.metrics.annual_return,
            })
        })
        .collect();
    efficient_frontier(&points)
}
