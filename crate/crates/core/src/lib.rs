//! Kolmogorov-Zurbenko decomposition of daily log-return series and robust
//! polynomial surface fits `f(x, y) = sum p_mn x^m y^n` for each component.
//!
//! The pipeline runs ingest -> log returns -> KZ decomposition into trend,
//! seasonal and remainder -> per-series feature tables -> OLS / LAR /
//! bisquare fits with confidence bounds -> chronological train/test RMSE.
//!
//! Surface inputs default to `x = t / T` (scaled trading-day index) and
//! `y = value at t - lag`, with the current value as the response. This is
//! an assumption of this crate; see [`surface_fit::FeatureSpec`].

pub mod cli;
pub mod decompose;
pub mod error;
pub mod evaluate;
pub mod ingest;
pub mod pipeline;
pub mod surface_fit;

pub use error::{Error, Result};
