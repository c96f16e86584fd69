//! Price-file ingestion, pipeline configuration and series validation.
//!
//! Input files follow the common OHLC export layout: a header row with at
//! least `Date` and `Close`, optionally `Open`, `High`, `Low`, `Adj Close` and
//! `Volume`. Cells reading `null`, `NaN` or nothing at all mark a missing
//! observation.

use std::collections::HashSet;

use chrono::NaiveDate;

use crate::decompose::{KzParams, SeriesName};
use crate::error::{Error, Result};
use crate::surface_fit::{FeatureSpec, FitMethod, TermSet};

const DATE_FORMAT: &str = "%Y-%m-%d";
const MISSING_MARKERS: [&str; 3] = ["null", "NaN", ""];
const MAX_GAP_DAYS: i64 = 7;

/// Dated price observations, one entry per trading day.
///
/// `None` marks a missing observation. Dates are strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    dates: Vec<NaiveDate>,
    values: Vec<Option<f64>>,
}

impl PriceSeries {
    pub fn new(dates: Vec<NaiveDate>, values: Vec<Option<f64>>) -> Result<Self> {
        if dates.len() != values.len() {
            return Err(Error::Format(format!(
                "{} dates but {} values",
                dates.len(),
                values.len()
            )));
        }
        for (row, pair) in dates.windows(2).enumerate() {
            if pair[1] <= pair[0] {
                return Err(Error::Order {
                    row: row + 2,
                    date: pair[1].to_string(),
                });
            }
        }
        Ok(Self { dates, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    pub fn missing(&self) -> impl Iterator<Item = bool> + '_ {
        self.values.iter().map(Option::is_none)
    }

    /// Serializes as a two-column `Date,Close` file; missing entries become `null`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("Date,Close\n");
        for (date, value) in self.dates.iter().zip(&self.values) {
            match value {
                Some(v) => out.push_str(&format!("{},{}\n", date.format(DATE_FORMAT), v)),
                None => out.push_str(&format!("{},null\n", date.format(DATE_FORMAT))),
            }
        }
        out
    }
}

/// Settings for one end-to-end run.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    /// `None` selects `Adj Close` when the file has it, else `Close`.
    pub price_column: Option<String>,
    pub kz_trend: KzParams,
    pub kz_seasonal: KzParams,
    pub n_train: usize,
    pub feature_spec: FeatureSpec,
    pub term_sets: ComponentTermSets,
    pub fit_method: FitMethod,
    pub outlier_threshold: f64,
    pub confidence_level: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            price_column: None,
            kz_trend: KzParams::TREND,
            kz_seasonal: KzParams::SEASONAL,
            n_train: 2000,
            feature_spec: FeatureSpec::default(),
            term_sets: ComponentTermSets::default(),
            fit_method: FitMethod::Lar,
            outlier_threshold: 3.0,
            confidence_level: 0.95,
        }
    }
}

impl PipelineConfig {
    /// Checks every cross-field invariant. Called by [`load_config`] and again
    /// by the CLI after flag overrides are applied.
    pub fn validate(&self) -> Result<()> {
        for (name, params) in [
            ("kz_trend", self.kz_trend),
            ("kz_seasonal", self.kz_seasonal),
        ] {
            if params.window < 3 || params.window % 2 == 0 {
                return Err(Error::Config(format!(
                    "{name}_window must be odd and >= 3, got {}",
                    params.window
                )));
            }
            if params.iterations == 0 {
                return Err(Error::Config(format!("{name}_iters must be >= 1")));
            }
        }
        if self.n_train == 0 {
            return Err(Error::Config("n_train must be positive".into()));
        }
        for name in SeriesName::ALL {
            let terms = self.term_sets.get(name);
            if self.n_train < terms.len() {
                return Err(Error::Config(format!(
                    "n_train={} is smaller than the {} terms configured for {}",
                    self.n_train,
                    terms.len(),
                    name
                )));
            }
        }
        if self.feature_spec.lag == 0 {
            return Err(Error::Config("lag must be >= 1".into()));
        }
        if !(self.outlier_threshold > 0.0 && self.outlier_threshold.is_finite()) {
            return Err(Error::Config(format!(
                "outlier_threshold must be positive, got {}",
                self.outlier_threshold
            )));
        }
        if !(self.confidence_level > 0.0 && self.confidence_level < 1.0) {
            return Err(Error::Config(format!(
                "confidence_level must lie in (0, 1), got {}",
                self.confidence_level
            )));
        }
        Ok(())
    }
}

/// One term set per fitted series.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentTermSets {
    pub volatility: TermSet,
    pub trend: TermSet,
    pub seasonal: TermSet,
    pub remainder: TermSet,
}

impl ComponentTermSets {
    pub fn get(&self, name: SeriesName) -> &TermSet {
        match name {
            SeriesName::Volatility => &self.volatility,
            SeriesName::Trend => &self.trend,
            SeriesName::Seasonal => &self.seasonal,
            SeriesName::Remainder => &self.remainder,
        }
    }

    fn get_mut(&mut self, name: SeriesName) -> &mut TermSet {
        match name {
            SeriesName::Volatility => &mut self.volatility,
            SeriesName::Trend => &mut self.trend,
            SeriesName::Seasonal => &mut self.seasonal,
            SeriesName::Remainder => &mut self.remainder,
        }
    }
}

impl Default for ComponentTermSets {
    fn default() -> Self {
        Self {
            volatility: TermSet::default_for(SeriesName::Volatility),
            trend: TermSet::default_for(SeriesName::Trend),
            seasonal: TermSet::default_for(SeriesName::Seasonal),
            remainder: TermSet::default_for(SeriesName::Remainder),
        }
    }
}

/// Parses an OHLC price file into a [`PriceSeries`].
///
/// Row numbers in errors are 1-based file lines (the header is line 1).
pub fn parse_price_csv(raw_text: &str, config: &PipelineConfig) -> Result<PriceSeries> {
    if raw_text.trim().is_empty() {
        return Err(Error::Format("input is empty".into()));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(raw_text.as_bytes());

    let headers = reader
        .headers()
        .map_err(|e| Error::Format(e.to_string()))?
        .clone();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let date_col = find("Date").ok_or_else(|| Error::Format("missing Date column".into()))?;
    let price_col = match &config.price_column {
        Some(name) => find(name)
            .ok_or_else(|| Error::Format(format!("configured price column {name:?} not found")))?,
        None => find("Adj Close")
            .or_else(|| find("Close"))
            .ok_or_else(|| Error::Format("missing Close column".into()))?,
    };

    let mut dates: Vec<NaiveDate> = Vec::new();
    let mut values = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let row = e.position().map_or(0, |p| p.line() as usize);
            Error::Parse {
                row,
                message: e.to_string(),
            }
        })?;
        let row = record
            .position()
            .map_or(dates.len() + 2, |p| p.line() as usize);

        let date_cell = record.get(date_col).unwrap_or("");
        let date = NaiveDate::parse_from_str(date_cell, DATE_FORMAT).map_err(|e| Error::Parse {
            row,
            message: format!("bad date {date_cell:?}: {e}"),
        })?;
        if let Some(prev) = dates.last() {
            if date <= *prev {
                return Err(Error::Order {
                    row,
                    date: date_cell.to_string(),
                });
            }
        }

        let cell = record.get(price_col).unwrap_or("");
        let value = if MISSING_MARKERS.contains(&cell) {
            None
        } else {
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                row,
                message: format!("bad price {cell:?}"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    row,
                    message: format!("non-finite price {cell:?}"),
                });
            }
            Some(v)
        };
        dates.push(date);
        values.push(value);
    }

    if dates.is_empty() {
        return Err(Error::Format("no data rows after the header".into()));
    }
    Ok(PriceSeries { dates, values })
}

const CONFIG_KEYS: [&str; 14] = [
    "price_column",
    "kz_trend_window",
    "kz_trend_iters",
    "kz_seasonal_window",
    "kz_seasonal_iters",
    "n_train",
    "fit_method",
    "outlier_threshold",
    "confidence_level",
    "lag",
    "terms_volatility",
    "terms_trend",
    "terms_seasonal",
    "terms_remainder",
];

/// Parses a flat `key = value` document. Blank lines and `#` comments are
/// ignored; unset keys keep their defaults.
pub fn load_config(raw_text: &str) -> Result<PipelineConfig> {
    let mut config = PipelineConfig::default();
    let mut seen = HashSet::new();

    for (lineno, line) in raw_text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
        let key = key.trim();
        let value = value.trim();
        if !CONFIG_KEYS.contains(&key) {
            return Err(Error::Config(format!(
                "line {}: unknown key {key:?}",
                lineno + 1
            )));
        }
        if !seen.insert(key.to_string()) {
            return Err(Error::Config(format!(
                "line {}: duplicate key {key:?}",
                lineno + 1
            )));
        }
        apply_key(&mut config, key, value)?;
    }

    config.validate()?;
    Ok(config)
}

fn apply_key(config: &mut PipelineConfig, key: &str, value: &str) -> Result<()> {
    match key {
        "price_column" => config.price_column = Some(value.to_string()),
        "kz_trend_window" => config.kz_trend.window = parse_count(key, value)?,
        "kz_trend_iters" => config.kz_trend.iterations = parse_count(key, value)?,
        "kz_seasonal_window" => config.kz_seasonal.window = parse_count(key, value)?,
        "kz_seasonal_iters" => config.kz_seasonal.iterations = parse_count(key, value)?,
        "n_train" => config.n_train = parse_count(key, value)?,
        "lag" => config.feature_spec.lag = parse_count(key, value)?,
        "fit_method" => {
            config.fit_method = value.parse().map_err(Error::Config)?;
        }
        "outlier_threshold" => config.outlier_threshold = parse_number(key, value)?,
        "confidence_level" => config.confidence_level = parse_number(key, value)?,
        _ => {
            let name = key
                .strip_prefix("terms_")
                .and_then(|s| s.parse::<SeriesName>().ok())
                .ok_or_else(|| Error::Config(format!("unknown key {key:?}")))?;
            *config.term_sets.get_mut(name) = value.parse::<TermSet>().map_err(Error::Config)?;
        }
    }
    Ok(())
}

fn parse_count(key: &str, value: &str) -> Result<usize> {
    let n: i64 = value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: expected an integer, got {value:?}")))?;
    if n <= 0 {
        return Err(Error::Config(format!("{key} must be positive, got {n}")));
    }
    Ok(n as usize)
}

fn parse_number(key: &str, value: &str) -> Result<f64> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: expected a number, got {value:?}")))
}

/// A run of more than seven calendar days between consecutive observations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DateGap {
    pub from: NaiveDate,
    pub to: NaiveDate,
    pub days: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub missing: usize,
    pub non_positive: usize,
    pub gaps: Vec<DateGap>,
    /// Set when any present price is non-positive; log returns are undefined.
    pub fatal: bool,
}

impl ValidationReport {
    pub fn findings(&self) -> usize {
        self.missing + self.non_positive + self.gaps.len()
    }
}

pub fn validate_series(series: &PriceSeries) -> ValidationReport {
    let missing = series.values.iter().filter(|v| v.is_none()).count();
    let non_positive = series
        .values
        .iter()
        .flatten()
        .filter(|v| **v <= 0.0)
        .count();
    let gaps = series
        .dates
        .windows(2)
        .filter_map(|pair| {
            let days = (pair[1] - pair[0]).num_days();
            (days > MAX_GAP_DAYS).then(|| DateGap {
                from: pair[0],
                to: pair[1],
                days,
            })
        })
        .collect();
    ValidationReport {
        missing,
        non_positive,
        gaps,
        fatal: non_positive > 0,
    }
}
