//! Log returns and Kolmogorov-Zurbenko decomposition.
//!
//! A KZ(m, p) filter is `p` successive passes of a centred moving average of
//! odd window `m = 2k + 1`. Windows are truncated at the series edges and
//! missing points are skipped, so every pass averages whatever observations
//! fall inside `[i - k, i + k]`. An output is missing only when its window
//! holds no observation at all.
//!
//! The return series `A(t)` splits as
//!
//! ```text
//! trend     e(t) = KZ(365, 3)
//! seasonal  S(t) = KZ(15, 5) - KZ(365, 3)
//! remainder W(t) = A(t) - KZ(15, 5)
//! ```
//!
//! which sums back to `A(t)` wherever `A(t)` is present. The remainder is
//! taken as `A(t) - (e(t) + S(t))`, equal to the above up to rounding.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::PriceSeries;

/// Window length and iteration count of one KZ filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KzParams {
    pub window: usize,
    pub iterations: usize,
}

impl KzParams {
    pub const TREND: KzParams = KzParams {
        window: 365,
        iterations: 3,
    };
    pub const SEASONAL: KzParams = KzParams {
        window: 15,
        iterations: 5,
    };
}

/// The four series the pipeline fits: the return series itself plus its
/// three components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeriesName {
    Volatility,
    Trend,
    Seasonal,
    Remainder,
}

impl SeriesName {
    pub const ALL: [SeriesName; 4] = [
        SeriesName::Volatility,
        SeriesName::Trend,
        SeriesName::Seasonal,
        SeriesName::Remainder,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SeriesName::Volatility => "volatility",
            SeriesName::Trend => "trend",
            SeriesName::Seasonal => "seasonal",
            SeriesName::Remainder => "remainder",
        }
    }

    /// One-letter label used in coefficient tables.
    pub fn abbreviation(self) -> char {
        match self {
            SeriesName::Volatility => 'V',
            SeriesName::Trend => 'T',
            SeriesName::Seasonal => 'S',
            SeriesName::Remainder => 'R',
        }
    }

    pub fn from_abbreviation(c: char) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.abbreviation() == c)
    }
}

impl fmt::Display for SeriesName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SeriesName {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| format!("unknown series {s:?}"))
    }
}

/// Daily log returns `r(t) = ln P(t+1) - ln P(t)` for `t = 1..T-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    pub values: Vec<Option<f64>>,
}

impl ReturnSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecomposedSeries {
    pub original: ReturnSeries,
    pub trend: Vec<Option<f64>>,
    pub seasonal: Vec<Option<f64>>,
    pub remainder: Vec<Option<f64>>,
}

impl DecomposedSeries {
    pub fn len(&self) -> usize {
        self.original.len()
    }

    pub fn is_empty(&self) -> bool {
        self.original.is_empty()
    }

    pub fn component(&self, name: SeriesName) -> &[Option<f64>] {
        match name {
            SeriesName::Volatility => &self.original.values,
            SeriesName::Trend => &self.trend,
            SeriesName::Seasonal => &self.seasonal,
            SeriesName::Remainder => &self.remainder,
        }
    }

    /// `index,original,trend,seasonal,remainder` with a 1-based trading-day
    /// index; missing values are empty cells.
    pub fn to_csv(&self) -> String {
        let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let mut out = String::from("index,original,trend,seasonal,remainder\n");
        for i in 0..self.len() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                i + 1,
                cell(self.original.values[i]),
                cell(self.trend[i]),
                cell(self.seasonal[i]),
                cell(self.remainder[i]),
            ));
        }
        out
    }
}

pub fn log_returns(prices: &PriceSeries) -> Result<ReturnSeries> {
    if prices.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "need at least 2 prices for a return, got {}",
            prices.len()
        )));
    }
    let values = prices.values();
    if let Some((index, value)) = values
        .iter()
        .enumerate()
        .find_map(|(i, v)| v.filter(|x| *x <= 0.0).map(|x| (i, x)))
    {
        return Err(Error::NonPositivePrice { index, value });
    }
    let returns = values
        .windows(2)
        .map(|pair| match (pair[0], pair[1]) {
            (Some(a), Some(b)) => Some(b.ln() - a.ln()),
            _ => None,
        })
        .collect();
    Ok(ReturnSeries { values: returns })
}

/// One centred moving-average pass with edge truncation and missing-value
/// skipping.
pub fn moving_average_pass(series: &[Option<f64>], window: usize) -> Result<Vec<Option<f64>>> {
    if window == 0 || window.is_multiple_of(2) {
        return Err(Error::Window(window));
    }
    let half = window / 2;
    let n = series.len();
    let out = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half).min(n.saturating_sub(1));
            let (sum, count) = series[lo..=hi]
                .iter()
                .flatten()
                .fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
            (count > 0).then(|| sum / count as f64)
        })
        .collect();
    Ok(out)
}

pub fn kz_filter(
    series: &[Option<f64>],
    window: usize,
    iterations: usize,
) -> Result<Vec<Option<f64>>> {
    if window == 0 || window.is_multiple_of(2) {
        return Err(Error::Window(window));
    }
    if iterations == 0 {
        return Err(Error::InsufficientData(
            "KZ filter needs at least one iteration".into(),
        ));
    }
    let mut current = series.to_vec();
    for _ in 0..iterations {
        current = moving_average_pass(&current, window)?;
    }
    Ok(current)
}

pub fn decompose(
    returns: &ReturnSeries,
    trend_params: KzParams,
    seasonal_params: KzParams,
) -> Result<DecomposedSeries> {
    let original = &returns.values;
    let slow = kz_filter(original, trend_params.window, trend_params.iterations)?;
    let fast = kz_filter(original, seasonal_params.window, seasonal_params.iterations)?;

    let seasonal: Vec<Option<f64>> = fast
        .iter()
        .zip(&slow)
        .map(|(f, s)| Some((*f)? - (*s)?))
        .collect();
    // Subtract the rounded trend + seasonal rather than the fast filter, so
    // that summing the three components reproduces A(t) to one rounding even
    // where A(t) is tiny next to the filtered values.
    let remainder = original
        .iter()
        .zip(slow.iter().zip(&seasonal))
        .map(|(a, (e, s))| Some((*a)? - ((*e)? + (*s)?)))
        .collect();

    Ok(DecomposedSeries {
        original: returns.clone(),
        trend: slow,
        seasonal,
        remainder,
    })
}
