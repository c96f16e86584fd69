//! Sparse bivariate polynomial surfaces `f(x, y) = sum p_mn x^m y^n`, fitted by
//! ordinary least squares or by IRLS for the robust LAR and bisquare
//! criteria.

mod bounds;
mod features;
mod lsq;
mod model;
mod outliers;
mod robust;
mod terms;
mod vertex;

pub use bounds::{confidence_bounds, t_quantile};
pub use features::{build_feature_table, FeatureSource, FeatureSpec, FeatureTable};
pub use model::{evaluate_surface, FitMethod, PolySurfaceModel};
pub use outliers::{remove_outliers, OutlierSplit, DEFAULT_OUTLIER_THRESHOLD};
pub use robust::{
    bisquare_weight, fit, fit_bisquare, fit_lar, fit_ols, mad_sigma, median, IrlsOptions,
    DEFAULT_CONFIDENCE, MAD_SCALE,
};
pub use terms::{design_matrix, Term, TermSet};

/// LAR fit together with `sum |r|` after the OLS start and after each accepted
/// IRLS step.
pub fn fit_lar_traced(
    table: &FeatureTable,
    terms: &TermSet,
    opts: &IrlsOptions,
) -> crate::Result<(PolySurfaceModel, Vec<f64>)> {
    robust::lar_with_trace(table, terms, opts)
}
