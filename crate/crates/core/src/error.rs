use std::path::PathBuf;

use chrono::NaiveDate;
use thiserror::Error;

use crate::backtest::Window;
use crate::portfolio::Objective;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{ticker}: malformed price file: {message}")]
    MalformedPrices { ticker: String, message: String },

    #[error("{ticker}: no valid price rows")]
    NoValidRows { ticker: String },

    #[error("{ticker}: non-positive price {price} on {date}")]
    NonPositivePrice {
        ticker: String,
        date: NaiveDate,
        price: f64,
    },

    #[error("{ticker}: duplicate date {date}")]
    DuplicateDate { ticker: String, date: NaiveDate },

    #[error("{ticker}: dates not in ascending order ({previous} followed by {date})")]
    UnsortedDates {
        ticker: String,
        previous: NaiveDate,
        date: NaiveDate,
    },

    #[error("series too short: need at least {needed} observations, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error("insufficient overlap: {common} common dates across {series} series, need at least 3")]
    InsufficientOverlap { common: usize, series: usize },

    #[error("universe too small: {0} asset(s), need at least 2")]
    UniverseTooSmall(usize),

    #[error("invalid split: {0}")]
    InvalidSplit(String),

    #[error("empty {window} window ({start}..={end})")]
    EmptyWindow {
        window: Window,
        start: NaiveDate,
        end: NaiveDate,
    },

    #[error("ticker mismatch: expected {expected:?}, got {got:?}")]
    TickerMismatch {
        expected: Vec<String>,
        got: Vec<String>,
    },

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("wealth curve undefined: return {value} at step {index} is <= -1")]
    WealthCollapse { index: usize, value: f64 },

    #[error("broken covariance input: portfolio variance {0} is negative")]
    NegativeVariance(f64),

    #[error("insufficient downside observations: {0} negative return(s), need at least 2")]
    InsufficientDownside(usize),

    #[error("no candidate has a valid {0} ratio")]
    NoValidCandidate(Objective),

    #[error("{universe}: no objective has a valid portfolio")]
    NoSelection { universe: String },

    #[error("weight sampling produced an all-zero draw {0} times in a row")]
    DegenerateDraw(usize),

    #[error("missing {objective} report for the {window} window")]
    MissingReport { objective: Objective, window: Window },

    #[error("manifest {path}: {message}")]
    Manifest { path: PathBuf, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),
}
