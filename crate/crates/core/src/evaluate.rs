//! Chronological splitting, residuals, RMSE and the report/table outputs.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::decompose::SeriesName;
use crate::error::{Error, Result};
use crate::surface_fit::{evaluate_surface, FeatureTable, FitMethod, PolySurfaceModel, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RmseMode {
    /// `sqrt(SSE / (n - p))`
    Train,
    /// `sqrt(SSE / n)`
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub series_name: SeriesName,
    pub method: FitMethod,
    pub train_rmse: f64,
    pub test_rmse: f64,
    pub n_train: usize,
    pub n_test: usize,
    pub excluded: Vec<usize>,
    pub converged: bool,
}

impl FitReport {
    pub fn to_document(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }

    pub fn from_document(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Document(e.to_string()))
    }
}

/// First `n_train` rows (by provenance) train, the rest test. No shuffling.
pub fn split_train_test(
    table: &FeatureTable,
    n_train: usize,
) -> Result<(FeatureTable, FeatureTable)> {
    let rows = table.len();
    if n_train == 0 || n_train >= rows {
        return Err(Error::Split { n_train, rows });
    }
    let mut order: Vec<usize> = (0..rows).collect();
    order.sort_by_key(|&i| table.provenance()[i]);
    let ordered = table.select(&order);
    Ok((ordered.slice(0..n_train), ordered.slice(n_train..rows)))
}

/// `target_i - f(x_i, y_i)` in row order.
pub fn residuals(model: &PolySurfaceModel, table: &FeatureTable) -> Vec<f64> {
    table
        .x()
        .iter()
        .zip(table.y())
        .zip(table.target())
        .map(|((&x, &y), &t)| t - evaluate_surface(model, x, y))
        .collect()
}

pub fn rmse(model: &PolySurfaceModel, table: &FeatureTable, mode: RmseMode) -> Result<f64> {
    let n = table.len();
    let p = model.terms.len();
    let sse: f64 = residuals(model, table).iter().map(|r| r * r).sum();
    let denom = match mode {
        RmseMode::Train if n <= p => return Err(Error::DegreesOfFreedom { rows: n, terms: p }),
        RmseMode::Train => n - p,
        RmseMode::Test if n == 0 => {
            return Err(Error::InsufficientData("RMSE of an empty table".into()))
        }
        RmseMode::Test => n,
    };
    Ok((sse / denom as f64).sqrt())
}

/// `train` is the table the model was fitted on (after any exclusion);
/// `excluded` lists the provenance of rows removed from it.
pub fn fit_report(
    series_name: SeriesName,
    method: FitMethod,
    model: &PolySurfaceModel,
    train: &FeatureTable,
    test: &FeatureTable,
    excluded: &[usize],
) -> Result<FitReport> {
    Ok(FitReport {
        series_name,
        method,
        train_rmse: rmse(model, train, RmseMode::Train)?,
        test_rmse: rmse(model, test, RmseMode::Test)?,
        n_train: train.len(),
        n_test: test.len(),
        excluded: excluded.to_vec(),
        converged: model.converged,
    })
}

/// One cell of a coefficient table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientEntry {
    pub term: Term,
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
}

impl CoefficientEntry {
    pub fn cell(&self) -> String {
        format!("{} ({}, {})", self.value, self.lower, self.upper)
    }

    fn parse_cell(term: Term, cell: &str) -> Result<Self> {
        let bad = || Error::Document(format!("bad coefficient cell {cell:?}"));
        let (value, rest) = cell.split_once(" (").ok_or_else(bad)?;
        let (lower, upper) = rest
            .strip_suffix(')')
            .and_then(|r| r.split_once(", "))
            .ok_or_else(bad)?;
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
        Ok(Self {
            term,
            value: num(value)?,
            lower: num(lower)?,
            upper: num(upper)?,
        })
    }
}

fn entries(model: &PolySurfaceModel) -> impl Iterator<Item = CoefficientEntry> + '_ {
    model
        .terms
        .iter()
        .zip(&model.coefficients)
        .zip(&model.bounds)
        .map(|((term, &value), &(lower, upper))| CoefficientEntry {
            term,
            value,
            lower,
            upper,
        })
}

/// Renders the models as a grid: one row group per `m`, one row per series
/// (`V`, `T`, `S`, `R`), one column per `n`. Cells read
/// `value (lower, upper)`; absent terms are blank.
///
/// ```text
/// m | series | n=0 | n=1 | n=2
/// 0 | V | -0.0005495 (-0.001239, 0.00014) | 0.0708 (0.06661, 0.07499) |
/// ```
pub fn export_coefficient_table(models: &BTreeMap<SeriesName, PolySurfaceModel>) -> String {
    let all_terms = || models.values().flat_map(|m| m.terms.iter());
    let max_m = all_terms().map(|t| t.m).max().unwrap_or(0);
    let max_n = all_terms().map(|t| t.n).max().unwrap_or(0);

    let mut out = String::from("m | series");
    for n in 0..=max_n {
        out.push_str(&format!(" | n={n}"));
    }
    out.push('\n');

    for m in 0..=max_m {
        for (name, model) in models {
            let mut line = format!("{m} | {}", name.abbreviation());
            for n in 0..=max_n {
                line.push_str(" | ");
                if let Some(entry) = entries(model).find(|e| e.term == Term::new(m, n)) {
                    line.push_str(&entry.cell());
                }
            }
            out.push_str(line.trim_end());
            out.push('\n');
        }
    }
    out
}

/// Inverse of [`export_coefficient_table`].
pub fn parse_coefficient_table(text: &str) -> Result<BTreeMap<SeriesName, Vec<CoefficientEntry>>> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Document("empty coefficient table".into()))?;
    let columns: Vec<u32> = header
        .split('|')
        .skip(2)
        .map(|c| {
            c.trim()
                .strip_prefix("n=")
                .and_then(|n| n.parse().ok())
                .ok_or_else(|| Error::Document(format!("bad header column {c:?}")))
        })
        .collect::<Result<_>>()?;

    let mut out: BTreeMap<SeriesName, Vec<CoefficientEntry>> = BTreeMap::new();
    for line in lines.filter(|l| !l.trim().is_empty()) {
        let mut cells = line.split('|').map(str::trim);
        let m: u32 = cells
            .next()
            .and_then(|c| c.parse().ok())
            .ok_or_else(|| Error::Document(format!("bad row {line:?}")))?;
        let series = cells
            .next()
            .and_then(|c| c.chars().next())
            .and_then(SeriesName::from_abbreviation)
            .ok_or_else(|| Error::Document(format!("bad series label in {line:?}")))?;
        let group = out.entry(series).or_default();
        for (cell, &n) in cells.zip(&columns) {
            if !cell.is_empty() {
                group.push(CoefficientEntry::parse_cell(Term::new(m, n), cell)?);
            }
        }
    }
    Ok(out)
}

/// `series,m,n,coefficient,lower,upper`, one line per fitted term.
pub fn export_coefficient_csv(models: &BTreeMap<SeriesName, PolySurfaceModel>) -> String {
    let mut out = String::from("series,m,n,coefficient,lower,upper\n");
    for (name, model) in models {
        for e in entries(model) {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                name, e.term.m, e.term.n, e.value, e.lower, e.upper
            ));
        }
    }
    out
}
