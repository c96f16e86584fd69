//! Regenerates `data/synthetic_vix.csv`: 2857 business days of a VIX-like
//! index built from a slow trend, a 15-day cycle and heavy-tailed AR(1) noise
//! on the log level, with a handful of `null` rows.
//!
//! cargo run -p volfit --example gen_synthetic > crates/core/data/synthetic_vix.csv

use chrono::{Datelike, Days, NaiveDate, Weekday};
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, StudentT};

const ROWS: usize = 2857;
const SEED: u64 = 20110103;

fn main() {
    let mut rng = rand::rngs::StdRng::seed_from_u64(SEED);
    let shocks = StudentT::new(3.0).unwrap();

    let missing: Vec<usize> = (0..6).map(|_| rng.random_range(50..ROWS - 50)).collect();

    let mut date = NaiveDate::from_ymd_opt(2011, 1, 3).unwrap();
    let mut noise = 0.0f64;
    let mut prev_close = None::<f64>;

    println!("Date,Open,High,Low,Close,Adj Close,Volume");
    for t in 0..ROWS {
        let tf = t as f64;
        noise = 0.95 * noise + 0.04 * shocks.sample(&mut rng);
        let log_level = 18f64.ln()
            + 0.35 * (2.0 * std::f64::consts::PI * tf / 1400.0).sin()
            + 0.10 * (2.0 * std::f64::consts::PI * tf / 15.0).sin()
            + noise;
        let close = log_level.exp();

        if missing.contains(&t) {
            println!("{date},null,null,null,null,null,null");
        } else {
            let open = prev_close.unwrap_or(close);
            let high = open.max(close) * 1.01;
            let low = open.min(close) * 0.99;
            println!("{date},{open:.6},{high:.6},{low:.6},{close:.6},{close:.6},0");
            prev_close = Some(close);
        }

        date = next_business_day(date);
    }
}

fn next_business_day(date: NaiveDate) -> NaiveDate {
    let mut next = date + Days::new(1);
    while matches!(next.weekday(), Weekday::Sat | Weekday::Sun) {
        next = next + Days::new(1);
    }
    next
}
