use crate::error::{Error, Result};
use crate::evaluate::residuals;
use crate::surface_fit::robust::{mad_sigma, median};
use crate::surface_fit::{FeatureTable, PolySurfaceModel};

pub const DEFAULT_OUTLIER_THRESHOLD: f64 = 3.0;

#[derive(Debug, Clone, PartialEq)]
pub struct OutlierSplit {
    pub kept: FeatureTable,
    /// Provenance indices of the dropped rows.
    pub excluded: Vec<usize>,
}

/// Drops rows whose residual lies more than `threshold` robust standard
/// deviations from the median residual. The scale is `MAD / 0.6745`; when it
/// is zero every row off the median residual is dropped.
pub fn remove_outliers(
    table: &FeatureTable,
    model: &PolySurfaceModel,
    threshold: f64,
) -> Result<OutlierSplit> {
    if threshold.is_nan() || threshold <= 0.0 {
        return Err(Error::Config(format!(
            "outlier threshold must be positive, got {threshold}"
        )));
    }
    let resid = residuals(model, table);
    let center = median(&resid);
    let scale = mad_sigma(&resid);
    let is_outlier = |r: f64| {
        if scale > 0.0 {
            (r - center).abs() / scale > threshold
        } else {
            r != center
        }
    };

    let (kept, dropped): (Vec<usize>, Vec<usize>) =
        (0..table.len()).partition(|&i| !is_outlier(resid[i]));
    let terms = model.terms.len();
    if kept.len() < terms {
        return Err(Error::Exclusion {
            excluded: dropped.len(),
            remaining: kept.len(),
            terms,
        });
    }
    Ok(OutlierSplit {
        excluded: dropped.iter().map(|&i| table.provenance()[i]).collect(),
        kept: table.select(&kept),
    })
}
