//! End-to-end run: prices -> returns -> components -> per-series surfaces.

use std::collections::BTreeMap;

use crate::decompose::{decompose, log_returns, DecomposedSeries, SeriesName};
use crate::error::{Error, Result};
use crate::evaluate::{fit_report, split_train_test, FitReport};
use crate::ingest::{parse_price_csv, validate_series, PipelineConfig};
use crate::surface_fit::{
    build_feature_table, confidence_bounds, fit, remove_outliers, FeatureTable, IrlsOptions,
    PolySurfaceModel,
};

/// Everything produced for one of the four series.
#[derive(Debug, Clone)]
pub struct SeriesFit {
    pub model: PolySurfaceModel,
    pub report: FitReport,
    /// Training rows before outlier exclusion.
    pub train: FeatureTable,
    /// Training rows the final model was fitted on.
    pub kept: FeatureTable,
    pub test: FeatureTable,
}

pub fn decompose_prices(raw_csv: &str, config: &PipelineConfig) -> Result<DecomposedSeries> {
    let prices = parse_price_csv(raw_csv, config)?;
    let report = validate_series(&prices);
    if report.fatal {
        return Err(Error::Format(format!(
            "{} non-positive price(s); log returns are undefined",
            report.non_positive
        )));
    }
    let returns = log_returns(&prices)?;
    decompose(&returns, config.kz_trend, config.kz_seasonal)
}

/// Feature table of one series split chronologically into train and test.
pub fn split_series(
    decomposed: &DecomposedSeries,
    name: SeriesName,
    config: &PipelineConfig,
) -> Result<(FeatureTable, FeatureTable)> {
    let table = build_feature_table(decomposed.component(name), &config.feature_spec)?;
    split_train_test(&table, config.n_train)
}

/// Fit, drop training outliers, refit, attach bounds and evaluate both splits.
pub fn fit_series(
    decomposed: &DecomposedSeries,
    name: SeriesName,
    config: &PipelineConfig,
    opts: &IrlsOptions,
) -> Result<SeriesFit> {
    let terms = config.term_sets.get(name);
    let (train, test) = split_series(decomposed, name, config)?;
    let first = fit(config.fit_method, &train, terms, opts)?;

    let (kept, excluded, mut model) =
        match remove_outliers(&train, &first, config.outlier_threshold) {
            Ok(split) if split.excluded.is_empty() => (train.clone(), Vec::new(), first),
            Ok(split) if split.kept.len() > terms.len() => {
                let refit = fit(config.fit_method, &split.kept, terms, opts)?;
                (split.kept, split.excluded, refit)
            }
            Ok(_) | Err(Error::Exclusion { .. }) => (train.clone(), Vec::new(), first),
            Err(e) => return Err(e),
        };

    if kept.len() > terms.len() {
        model.bounds = confidence_bounds(&model, &kept, config.confidence_level)?;
    }
    let report = fit_report(name, config.fit_method, &model, &kept, &test, &excluded)?;
    Ok(SeriesFit {
        model,
        report,
        train,
        kept,
        test,
    })
}

pub fn fit_all(
    decomposed: &DecomposedSeries,
    config: &PipelineConfig,
    opts: &IrlsOptions,
) -> Result<BTreeMap<SeriesName, SeriesFit>> {
    SeriesName::ALL
        .into_iter()
        .map(|name| Ok((name, fit_series(decomposed, name, config, opts)?)))
        .collect()
}
