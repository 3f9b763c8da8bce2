//! Regenerates the bundled synthetic universe under `fixtures/auto/`.
//!
//! Nine assets follow a one-factor log-normal model over weekdays from
//! 2016-12-01 to 2021-12-31; a tenth asset starts on 2017-11-02 so the
//! late-listing exclusion path is exercised. Each series skips a few random
//! days and one file carries an unparseable row.
//!
//!     cargo run -p ratiofolio-core --example make_fixture -- fixtures

use std::fmt::Write as _;
use std::path::PathBuf;

use chrono::{Datelike, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

// (ticker, annual drift, market beta, idiosyncratic annual vol, first date)
const ASSETS: [(&str, f64, f64, f64, (i32, u32, u32)); 10] = [
    ("A01", 0.10, 0.9, 0.22, (2016, 12, 1)),
    ("A02", 0.04, 1.3, 0.35, (2016, 12, 1)),
    ("A03", 0.08, 1.0, 0.25, (2016, 12, 1)),
    ("A04", 0.12, 0.8, 0.20, (2016, 12, 1)),
    ("A05", 0.02, 1.1, 0.30, (2016, 12, 1)),
    ("A06", 0.06, 0.7, 0.18, (2016, 12, 1)),
    ("A07", 0.16, 1.2, 0.32, (2016, 12, 1)),
    ("A08", 0.09, 1.0, 0.28, (2016, 12, 1)),
    ("A09", 0.05, 1.4, 0.38, (2016, 12, 1)),
    ("A10", 0.14, 1.0, 0.30, (2017, 11, 2)),
];

fn main() {
    let root = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fixtures".into()));
    let dir = root.join("auto");
    std::fs::create_dir_all(&dir).unwrap();

    let start = NaiveDate::from_ymd_opt(2016, 12, 1).unwrap();
    let end = NaiveDate::from_ymd_opt(2021, 12, 31).unwrap();
    let days: Vec<NaiveDate> = start
        .iter_days()
        .take_while(|d| *d <= end)
        .filter(|d| d.weekday().number_from_monday() <= 5)
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(20170101);
    let market = Normal::new(0.0004, 0.011).unwrap();
    let shocks: Vec<f64> = days.iter().map(|_| market.sample(&mut rng)).collect();

    let mut manifest = String::from("# Synthetic nine-asset universe plus one late listing.\n[[universe]]\nname = \"auto\"\n");
    for (k, &(ticker, drift, beta, vol, (y, m, d))) in ASSETS.iter().enumerate() {
        let first = NaiveDate::from_ymd_opt(y, m, d).unwrap();
        let noise = Normal::new(0.0, vol / 252f64.sqrt()).unwrap();
        let mut price = 50.0 + 25.0 * k as f64;
        let mut csv = String::from("date,adj_close\n");
        for (t, day) in days.iter().enumerate() {
            let r = drift / 252.0 + beta * (shocks[t] - 0.0004) + noise.sample(&mut rng);
            price *= r.exp();
            if *day < first || rng.random::<f64>() < 0.004 {
                continue;
            }
            if ticker == "A03" && t == 300 {
                writeln!(csv, "{},", day.format("%Y-%m-%d")).unwrap();
                continue;
            }
            writeln!(csv, "{},{:.6}", day.format("%Y-%m-%d"), price).unwrap();
        }
        std::fs::write(dir.join(format!("{ticker}.csv")), csv).unwrap();
        writeln!(manifest, "\n[[universe.asset]]\nticker = \"{ticker}\"\npath = \"auto/{ticker}.csv\"").unwrap();
    }
    std::fs::write(root.join("auto.toml"), manifest).unwrap();
}
