//! Price ingestion, daily returns, calendar alignment and train/test splitting.
//!
//! Price files are CSV with a `date,adj_close` header, ISO dates and rows in
//! ascending date order. Rows whose date or price cannot be parsed are dropped
//! and counted; structural problems (non-positive prices, duplicate or
//! out-of-order dates) are hard errors.

use std::collections::HashSet;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use chrono::NaiveDate;
use log::warn;
use serde::{Deserialize, Serialize};

use crate::backtest::Window;
use crate::error::{Error, Result};

const DATE_FORMAT: &str = "%Y-%m-%d";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PricePoint {
    pub date: NaiveDate,
    pub adj_close: f64,
}

/// Dated adjusted-close history for one asset.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    ticker: String,
    observations: Vec<PricePoint>,
}

impl PriceSeries {
    pub fn new(ticker: impl Into<String>, observations: Vec<PricePoint>) -> Result<Self> {
        let ticker = ticker.into();
        if observations.is_empty() {
            return Err(Error::NoValidRows { ticker });
        }
        for point in &observations {
            if point.adj_close <= 0.0 || !point.adj_close.is_finite() {
                return Err(Error::NonPositivePrice {
                    ticker,
                    date: point.date,
                    price: point.adj_close,
                });
            }
        }
        for pair in observations.windows(2) {
            let (previous, date) = (pair[0].date, pair[1].date);
            if date == previous {
                return Err(Error::DuplicateDate { ticker, date });
            }
            if date < previous {
                return Err(Error::UnsortedDates {
                    ticker,
                    previous,
                    date,
                });
            }
        }
        Ok(Self {
            ticker,
            observations,
        })
    }

    pub fn ticker(&self) -> &str {
        &self.ticker
    }

    pub fn observations(&self) -> &[PricePoint] {
        &self.observations
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn first_date(&self) -> NaiveDate {
        self.observations[0].date
    }

    pub fn last_date(&self) -> NaiveDate {
        self.observations[self.observations.len() - 1].date
    }

    /// Same history with every price multiplied by `factor`.
    pub fn rescaled(&self, factor: f64) -> Result<Self> {
        let observations = self
            .observations
            .iter()
            .map(|p| PricePoint {
                date: p.date,
                adj_close: p.adj_close * factor,
            })
            .collect();
        Self::new(self.ticker.clone(), observations)
    }
}

/// A parsed price file plus the number of rows that were dropped.
#[derive(Debug, Clone)]
pub struct LoadedPrices {
    pub series: PriceSeries,
    pub dropped_rows: usize,
}

pub fn load_prices(path: impl AsRef<Path>, ticker: &str) -> Result<LoadedPrices> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let loaded = parse_prices(file, ticker)?;
    if loaded.dropped_rows > 0 {
        warn!(
            "{}: dropped {} unparseable row(s) from {}",
            ticker,
            loaded.dropped_rows,
            path.display()
        );
    }
    Ok(loaded)
}

/// Parses `date,adj_close` CSV from any reader.
pub fn parse_prices<R: Read>(reader: R, ticker: &str) -> Result<LoadedPrices> {
    let malformed = |message: String| Error::MalformedPrices {
        ticker: ticker.to_string(),
        message,
    };
    let mut csv = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let headers = csv.headers().map_err(|e| malformed(e.to_string()))?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| malformed(format!("missing `{name}` column")))
    };
    let date_col = column("date")?;
    let price_col = column("adj_close")?;

    let mut observations = Vec::new();
    let mut dropped_rows = 0;
    for record in csv.records() {
        let record = record.map_err(|e| malformed(e.to_string()))?;
        let date = record
            .get(date_col)
            .and_then(|s| NaiveDate::parse_from_str(s, DATE_FORMAT).ok());
        let price = record
            .get(price_col)
            .and_then(|s| s.parse::<f64>().ok())
            .filter(|p| p.is_finite());
        match (date, price) {
            (Some(date), Some(adj_close)) => observations.push(PricePoint { date, adj_close }),
            _ => dropped_rows += 1,
        }
    }
    let series = PriceSeries::new(ticker, observations)?;
    Ok(LoadedPrices {
        series,
        dropped_rows,
    })
}

/// Simple returns `p[t] / p[t-1] - 1`, dated by the later observation.
pub fn compute_daily_returns(series: &PriceSeries) -> Result<Vec<(NaiveDate, f64)>> {
    let obs = series.observations();
    if obs.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: obs.len(),
        });
    }
    Ok(obs
        .windows(2)
        .map(|w| (w[1].date, w[1].adj_close / w[0].adj_close - 1.0))
        .collect())
}

/// Daily simple returns for a universe on a shared calendar.
///
/// `returns` is row-major: one row per date, one column per ticker.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedReturnPanel {
    tickers: Vec<String>,
    dates: Vec<NaiveDate>,
    returns: Vec<Vec<f64>>,
}

impl AlignedReturnPanel {
    pub fn new(tickers: Vec<String>, dates: Vec<NaiveDate>, returns: Vec<Vec<f64>>) -> Result<Self> {
        if tickers.len() < 2 {
            return Err(Error::UniverseTooSmall(tickers.len()));
        }
        if dates.len() != returns.len() {
            return Err(Error::Config(format!(
                "panel has {} dates but {} return rows",
                dates.len(),
                returns.len()
            )));
        }
        if let Some(row) = returns.iter().find(|row| row.len() != tickers.len()) {
            return Err(Error::Config(format!(
                "panel row has {} values for {} tickers",
                row.len(),
                tickers.len()
            )));
        }
        if dates.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("panel dates must be strictly increasing".into()));
        }
        Ok(Self {
            tickers,
            dates,
            returns,
        })
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.returns
    }

    pub fn num_assets(&self) -> usize {
        self.tickers.len()
    }

    pub fn num_days(&self) -> usize {
        self.dates.len()
    }

    pub fn column(&self, asset: usize) -> Vec<f64> {
        self.returns.iter().map(|row| row[asset]).collect()
    }

    /// Sub-panel of the rows dated within `[start, end]`.
    pub fn window(&self, start: NaiveDate, end: NaiveDate) -> (Vec<NaiveDate>, Vec<Vec<f64>>) {
        self.dates
            .iter()
            .zip(&self.returns)
            .filter(|(d, _)| (start..=end).contains(*d))
            .map(|(d, r)| (*d, r.clone()))
            .unzip()
    }

    /// Keeps only the given assets, in the given order.
    pub fn select(&self, assets: &[usize]) -> Result<Self> {
        let tickers = assets.iter().map(|&i| self.tickers[i].clone()).collect();
        let returns = self
            .returns
            .iter()
            .map(|row| assets.iter().map(|&i| row[i]).collect())
            .collect();
        Self::new(tickers, self.dates.clone(), returns)
    }
}

/// Inner-joins the series on their common dates and computes returns between
/// consecutive common dates.
pub fn align(series_list: &[PriceSeries]) -> Result<AlignedReturnPanel> {
    if series_list.len() < 2 {
        return Err(Error::UniverseTooSmall(series_list.len()));
    }
    let mut common: Vec<NaiveDate> = series_list[0]
        .observations()
        .iter()
        .map(|p| p.date)
        .collect();
    for series in &series_list[1..] {
        let dates: HashSet<NaiveDate> = series.observations().iter().map(|p| p.date).collect();
        common.retain(|d| dates.contains(d));
    }
    if common.len() < 3 {
        return Err(Error::InsufficientOverlap {
            common: common.len(),
            series: series_list.len(),
        });
    }

    let common_set: HashSet<NaiveDate> = common.iter().copied().collect();
    let closes: Vec<Vec<f64>> = series_list
        .iter()
        .map(|s| {
            s.observations()
                .iter()
                .filter(|p| common_set.contains(&p.date))
                .map(|p| p.adj_close)
                .collect()
        })
        .collect();

    let returns = (1..common.len())
        .map(|t| closes.iter().map(|c| c[t] / c[t - 1] - 1.0).collect())
        .collect();
    AlignedReturnPanel::new(
        series_list.iter().map(|s| s.ticker().to_string()).collect(),
        common[1..].to_vec(),
        returns,
    )
}

/// Splits off series whose history starts after `window_start`.
///
/// Returns `(kept, excluded_tickers)`; relative order is preserved in both.
pub fn filter_full_history(
    series_list: Vec<PriceSeries>,
    window_start: NaiveDate,
) -> (Vec<PriceSeries>, Vec<String>) {
    let (kept, late): (Vec<_>, Vec<_>) = series_list
        .into_iter()
        .partition(|s| s.first_date() <= window_start);
    let excluded = late.iter().map(|s| s.ticker().to_string()).collect();
    (kept, excluded)
}

/// Training and test windows, both inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_start: NaiveDate,
    pub train_end: NaiveDate,
    pub test_start: NaiveDate,
    pub test_end: NaiveDate,
}

impl SplitSpec {
    pub fn new(
        train_start: NaiveDate,
        train_end: NaiveDate,
        test_start: NaiveDate,
        test_end: NaiveDate,
    ) -> Result<Self> {
        let spec = Self {
            train_start,
            train_end,
            test_start,
            test_end,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.train_start < self.train_end) {
            return Err(Error::InvalidSplit(format!(
                "train start {} is not before train end {}",
                self.train_start, self.train_end
            )));
        }
        if !(self.train_end < self.test_start) {
            return Err(Error::InvalidSplit(format!(
                "train end {} is not before test start {}",
                self.train_end, self.test_start
            )));
        }
        if !(self.test_start <= self.test_end) {
            return Err(Error::InvalidSplit(format!(
                "test end {} is before test start {}",
                self.test_end, self.test_start
            )));
        }
        Ok(())
    }

    pub fn bounds(&self, window: Window) -> (NaiveDate, NaiveDate) {
        match window {
            Window::Train => (self.train_start, self.train_end),
            Window::Test => (self.test_start, self.test_end),
        }
    }
}

impl Default for SplitSpec {
    /// Four training years followed by one test year.
    fn default() -> Self {
        let d = |y, m, day| NaiveDate::from_ymd_opt(y, m, day).expect("valid date");
        Self {
            train_start: d(2017, 1, 1),
            train_end: d(2020, 12, 31),
            test_start: d(2021, 1, 1),
            test_end: d(2021, 12, 31),
        }
    }
}

pub fn split(
    panel: &AlignedReturnPanel,
    spec: &SplitSpec,
) -> Result<(AlignedReturnPanel, AlignedReturnPanel)> {
    spec.validate()?;
    let mut parts = [Window::Train, Window::Test].into_iter().map(|window| {
        let (start, end) = spec.bounds(window);
        let (dates, rows) = panel.window(start, end);
        if dates.is_empty() {
            return Err(Error::EmptyWindow { window, start, end });
        }
        AlignedReturnPanel::new(panel.tickers().to_vec(), dates, rows)
    });
    let train = parts.next().expect("two windows")?;
    let test = parts.next().expect("two windows")?;
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn day(n: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(2020, 1, 1).unwrap() + chrono::Days::new(n as u64)
    }

    fn series(ticker: &str, days: std::ops::RangeInclusive<u32>, prices: &[f64]) -> PriceSeries {
        let obs = days
            .zip(prices)
            .map(|(d, &p)| PricePoint {
                date: day(d),
                adj_close: p,
            })
            .collect();
        PriceSeries::new(ticker, obs).unwrap()
    }

    #[test]
    fn parses_two_rows() {
        let csv = "date,adj_close\n2020-01-02,100.0\n2020-01-03,101.0\n";
        let loaded = parse_prices(csv.as_bytes(), "A").unwrap();
        assert_eq!(loaded.series.len(), 2);
        assert_eq!(loaded.dropped_rows, 0);
        assert_eq!(loaded.series.observations()[1].adj_close, 101.0);
    }

    #[test]
    fn drops_row_with_empty_price() {
        let csv = "date,adj_close\n2020-01-02,100.0\n2020-01-03,\n2020-01-06,102.5\n";
        let loaded = parse_prices(csv.as_bytes(), "A").unwrap();
        assert_eq!(loaded.series.len(), 2);
        assert_eq!(loaded.dropped_rows, 1);
    }

    #[test]
    fn drops_unparseable_dates_and_prices() {
        let csv = "date,adj_close\nnot-a-date,1.0\n2020-01-02,abc\n2020-01-03,nan\n2020-01-06,5\n";
        let loaded = parse_prices(csv.as_bytes(), "A").unwrap();
        assert_eq!(loaded.series.len(), 1);
        assert_eq!(loaded.dropped_rows, 3);
    }

    #[test]
    fn negative_price_is_an_error() {
        let csv = "date,adj_close\n2020-01-02,100.0\n2020-01-03,-5.0\n";
        let err = parse_prices(csv.as_bytes(), "A").unwrap_err();
        assert!(err.to_string().contains("non-positive price"), "{err}");
    }

    #[test]
    fn zero_valid_rows_is_an_error() {
        let csv = "date,adj_close\n2020-01-02,\n";
        assert!(matches!(
            parse_prices(csv.as_bytes(), "A"),
            Err(Error::NoValidRows { .. })
        ));
    }

    #[test]
    fn duplicate_dates_are_an_error() {
        let csv = "date,adj_close\n2020-01-02,100.0\n2020-01-02,101.0\n";
        assert!(matches!(
            parse_prices(csv.as_bytes(), "A"),
            Err(Error::DuplicateDate { .. })
        ));
    }

    #[test]
    fn unsorted_rows_are_an_error() {
        let csv = "date,adj_close\n2020-01-03,101.0\n2020-01-02,100.0\n";
        assert!(matches!(
            parse_prices(csv.as_bytes(), "A"),
            Err(Error::UnsortedDates { .. })
        ));
    }

    #[test]
    fn missing_column_is_an_error() {
        let csv = "date,close\n2020-01-02,100.0\n";
        assert!(matches!(
            parse_prices(csv.as_bytes(), "A"),
            Err(Error::MalformedPrices { .. })
        ));
    }

    #[test]
    fn missing_file_is_an_error() {
        assert!(matches!(
            load_prices("/nonexistent/prices.csv", "A"),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn daily_returns() {
        let r = compute_daily_returns(&series("A", 0..=1, &[100.0, 110.0])).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].0, day(1));
        assert!((r[0].1 - 0.10).abs() < 1e-15);

        let r = compute_daily_returns(&series("A", 0..=2, &[100.0, 100.0, 100.0])).unwrap();
        assert_eq!(r.iter().map(|x| x.1).collect::<Vec<_>>(), vec![0.0, 0.0]);

        let r = compute_daily_returns(&series("A", 0..=2, &[100.0, 110.0, 99.0])).unwrap();
        assert!((r[0].1 - 0.10).abs() < 1e-15);
        assert!((r[1].1 + 0.10).abs() < 1e-15);
    }

    #[test]
    fn daily_returns_need_two_points() {
        assert!(matches!(
            compute_daily_returns(&series("A", 0..=0, &[100.0])),
            Err(Error::TooShort { got: 1, .. })
        ));
    }

    #[test]
    fn align_identical_calendars() {
        let a = series("A", 0..=4, &[1.0, 2.0, 3.0, 4.0, 5.0]);
        let b = series("B", 0..=4, &[5.0, 4.0, 3.0, 2.0, 1.0]);
        let panel = align(&[a, b]).unwrap();
        assert_eq!(panel.num_days(), 4);
        assert_eq!(panel.tickers(), &["A".to_string(), "B".to_string()]);
        assert_eq!(panel.dates()[0], day(1));
    }

    #[test]
    fn align_uses_intersection() {
        let a = series("A", 0..=4, &[1.0, 2.0, 3.0, 4.0, 5.0]);
        let b = series("B", 1..=4, &[4.0, 3.0, 2.0, 1.0]);
        let panel = align(&[a, b]).unwrap();
        assert_eq!(panel.num_days(), 3);
        assert_eq!(panel.dates(), &[day(2), day(3), day(4)]);
        // first aligned return of A is 3/2 - 1, not 2/1 - 1
        assert!((panel.rows()[0][0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn align_rejects_disjoint_calendars() {
        let a = series("A", 0..=2, &[1.0, 2.0, 3.0]);
        let b = series("B", 10..=12, &[1.0, 2.0, 3.0]);
        let err = align(&[a, b]).unwrap_err();
        assert!(err.to_string().contains("insufficient overlap"), "{err}");
    }

    #[test]
    fn align_needs_two_series() {
        let a = series("A", 0..=2, &[1.0, 2.0, 3.0]);
        assert!(matches!(align(&[a]), Err(Error::UniverseTooSmall(1))));
    }

    #[test]
    fn filter_reports_late_starters() {
        let start = day(5);
        let mut universe: Vec<PriceSeries> = (0..9)
            .map(|i| series(&format!("S{i}"), 0..=9, &[1.0; 10]))
            .collect();
        universe.insert(3, series("LATE", 6..=9, &[1.0; 4]));
        let (kept, excluded) = filter_full_history(universe.clone(), start);
        assert_eq!(kept.len(), 9);
        assert_eq!(excluded, vec!["LATE".to_string()]);

        universe.remove(0);
        universe.push(series("LATE2", 7..=9, &[1.0; 3]));
        assert_eq!(universe.len(), 10);
        let (kept, excluded) = filter_full_history(universe, start);
        assert_eq!(kept.len(), 8);
        assert_eq!(excluded, vec!["LATE".to_string(), "LATE2".to_string()]);
    }

    #[test]
    fn filter_keeps_series_starting_exactly_on_window_start() {
        let (kept, excluded) = filter_full_history(vec![series("A", 5..=6, &[1.0, 1.0])], day(5));
        assert_eq!(kept.len(), 1);
        assert!(excluded.is_empty());
    }

    fn ymd(y: i32, m: u32, d: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, d).unwrap()
    }

    fn weekday_panel(from: NaiveDate, to: NaiveDate) -> AlignedReturnPanel {
        use chrono::Datelike;
        let dates: Vec<NaiveDate> = from
            .iter_days()
            .take_while(|d| *d <= to)
            .filter(|d| d.weekday().number_from_monday() <= 5)
            .collect();
        let rows = dates.iter().map(|_| vec![0.001, -0.001]).collect();
        AlignedReturnPanel::new(vec!["A".into(), "B".into()], dates, rows).unwrap()
    }

    #[test]
    fn split_default_windows() {
        let panel = weekday_panel(ymd(2017, 1, 2), ymd(2021, 12, 31));
        let (train, test) = split(&panel, &SplitSpec::default()).unwrap();
        assert!((1000..=1050).contains(&train.num_days()), "{}", train.num_days());
        assert!((255..=265).contains(&test.num_days()), "{}", test.num_days());
        assert_eq!(train.num_days() + test.num_days(), panel.num_days());
        assert!(train.dates().last().unwrap() < test.dates().first().unwrap());
    }

    #[test]
    fn split_rejects_inverted_test_window() {
        assert!(SplitSpec::new(ymd(2017, 1, 1), ymd(2020, 12, 31), ymd(2021, 6, 1), ymd(2021, 1, 1)).is_err());
        assert!(SplitSpec::new(ymd(2017, 1, 1), ymd(2021, 12, 31), ymd(2021, 6, 1), ymd(2021, 9, 1)).is_err());
        assert!(SplitSpec::new(ymd(2017, 1, 1), ymd(2017, 1, 1), ymd(2021, 6, 1), ymd(2021, 9, 1)).is_err());
        assert!(SplitSpec::new(ymd(2017, 1, 1), ymd(2020, 1, 1), ymd(2021, 6, 1), ymd(2021, 6, 1)).is_ok());
    }

    #[test]
    fn split_reports_empty_test_window() {
        let panel = weekday_panel(ymd(2017, 1, 2), ymd(2019, 12, 31));
        let err = split(&panel, &SplitSpec::default()).unwrap_err();
        assert!(err.to_string().contains("empty test window"), "{err}");
    }

    proptest! {
        #[test]
        fn returns_round_trip_through_prices(
            start in 1.0f64..1000.0,
            rets in prop::collection::vec(-0.2f64..0.2, 1..50),
        ) {
            let mut prices = vec![start];
            for r in &rets {
                let last = *prices.last().unwrap();
                prices.push(last * (1.0 + r));
            }
            let s = series("A", 0..=(prices.len() as u32 - 1), &prices);
            let back = compute_daily_returns(&s).unwrap();
            for (got, want) in back.iter().zip(&rets) {
                prop_assert!((got.1 - want).abs() < 1e-12);
            }
        }

        #[test]
        fn power_of_two_rescaling_leaves_returns_bit_identical(
            prices in prop::collection::vec(0.01f64..1e4, 3..40),
            exp in -20i32..20,
        ) {
            let s = series("A", 0..=(prices.len() as u32 - 1), &prices);
            let scaled = s.rescaled(2f64.powi(exp)).unwrap();
            let a = compute_daily_returns(&s).unwrap();
            let b = compute_daily_returns(&scaled).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn arbitrary_rescaling_leaves_returns_within_rounding(
            prices in prop::collection::vec(0.01f64..1e4, 3..40),
            factor in 1e-3f64..1e3,
        ) {
            let s = series("A", 0..=(prices.len() as u32 - 1), &prices);
            let scaled = s.rescaled(factor).unwrap();
            let a = compute_daily_returns(&s).unwrap();
            let b = compute_daily_returns(&scaled).unwrap();
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x.1 - y.1).abs() <= 1e-15 * (1.0 + x.1.abs()) * 4.0);
            }
        }

        #[test]
        fn split_windows_are_disjoint_subsets(
            cut in 30u32..300,
            gap in 0u32..30,
            len in 1u32..100,
        ) {
            let base = ymd(2020, 1, 1);
            let panel = weekday_panel(base, base + chrono::Days::new(500));
            let at = |n: u32| base + chrono::Days::new(n as u64);
            let spec = SplitSpec::new(base, at(cut), at(cut + gap + 1), at(cut + gap + 1 + len)).unwrap();
            if let Ok((train, test)) = split(&panel, &spec) {
                let all: HashSet<_> = panel.dates().iter().collect();
                let tr: HashSet<_> = train.dates().iter().collect();
                let te: HashSet<_> = test.dates().iter().collect();
                prop_assert!(tr.is_subset(&all) && te.is_subset(&all));
                prop_assert!(tr.is_disjoint(&te));
            }
        }
    }

    #[test]
    fn permuted_csv_rows_are_rejected() {
        let sorted = "date,adj_close\n2020-01-02,1\n2020-01-03,2\n2020-01-06,3\n";
        let permuted = "date,adj_close\n2020-01-03,2\n2020-01-02,1\n2020-01-06,3\n";
        assert!(parse_prices(sorted.as_bytes(), "A").is_ok());
        assert!(matches!(
            parse_prices(permuted.as_bytes(), "A"),
            Err(Error::UnsortedDates { .. })
        ));
    }
}
