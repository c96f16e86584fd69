//! Ordinary and robust (LAR, bisquare) surface fits.
//!
//! Both robust fits run iteratively reweighted least squares from the OLS
//! solution. LAR weights each row by `1 / max(|r|, floor)`, where the floor
//! is `lar_floor` times the OLS residual scale; the reweighted step is accepted
//! only if it does not increase `sum |r|`, halving it toward the previous
//! iterate otherwise. Bisquare uses Tukey's biweight on residuals scaled by
//! `c * MAD / 0.6745`, with the scale re-estimated every iteration.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::surface_fit::bounds::bounds_from_variances;
use crate::surface_fit::lsq::{self, LsqSolution};
use crate::surface_fit::vertex;
use crate::surface_fit::{design_matrix, FeatureTable, FitMethod, PolySurfaceModel, TermSet};

/// Confidence level of the bounds attached at fit time.
pub const DEFAULT_CONFIDENCE: f64 = 0.95;

/// Consistency factor turning a normal MAD into a standard deviation.
pub const MAD_SCALE: f64 = 0.6745;

const MAX_STEP_HALVINGS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IrlsOptions {
    pub max_iterations: usize,
    /// Stop once `max |delta beta| <= tolerance * max |beta|`.
    pub tolerance: f64,
    /// LAR residual floor, as a multiple of the OLS residual scale.
    pub lar_floor: f64,
    pub bisquare_constant: f64,
}

impl Default for IrlsOptions {
    fn default() -> Self {
        Self {
            max_iterations: 1000,
            tolerance: 1e-8,
            lar_floor: 1e-8,
            bisquare_constant: 4.685,
        }
    }
}

impl IrlsOptions {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if self.max_iterations == 0
            || !positive(self.tolerance)
            || !positive(self.lar_floor)
            || !positive(self.bisquare_constant)
        {
            return Err(Error::Config(format!("invalid IRLS options {self:?}")));
        }
        Ok(())
    }
}

pub fn fit(
    method: FitMethod,
    table: &FeatureTable,
    terms: &TermSet,
    opts: &IrlsOptions,
) -> Result<PolySurfaceModel> {
    match method {
        FitMethod::Ols => fit_ols(table, terms),
        FitMethod::Lar => fit_lar(table, terms, opts),
        FitMethod::Bisquare => fit_bisquare(table, terms, opts),
    }
}

pub fn fit_ols(table: &FeatureTable, terms: &TermSet) -> Result<PolySurfaceModel> {
    let design = design_matrix(table, terms);
    let solution = lsq::solve(&design, table.target(), None, terms)?;
    Ok(finish(
        FitMethod::Ols,
        table,
        terms,
        &design,
        solution,
        Vec::new(),
        0,
        true,
    ))
}

pub fn fit_lar(
    table: &FeatureTable,
    terms: &TermSet,
    opts: &IrlsOptions,
) -> Result<PolySurfaceModel> {
    Ok(lar_with_trace(table, terms, opts)?.0)
}

/// LAR fit plus `sum |r|` after the OLS start and after every accepted step.
pub(crate) fn lar_with_trace(
    table: &FeatureTable,
    terms: &TermSet,
    opts: &IrlsOptions,
) -> Result<(PolySurfaceModel, Vec<f64>)> {
    opts.validate()?;
    let design = design_matrix(table, terms);
    let target = table.target();
    let start = lsq::solve(&design, target, None, terms)?;

    let mut beta = start.coefficients.clone();
    let mut resid = residuals(&design, target, &beta);
    let scale = residual_scale(&resid, terms.len());
    let mut objective = abs_sum(&resid);
    let mut trace = vec![objective];

    if scale == 0.0 {
        let model = finish(
            FitMethod::Lar,
            table,
            terms,
            &design,
            start,
            Vec::new(),
            0,
            true,
        );
        return Ok((model, trace));
    }
    let floor = opts.lar_floor * scale;

    let mut last = start;
    let mut last_weights = Vec::new();
    let mut iterations = 0;
    let mut converged = false;

    for iter in 1..=opts.max_iterations {
        let mut weights: Vec<f64> = resid.iter().map(|r| 1.0 / r.abs().max(floor)).collect();
        let mean = weights.iter().sum::<f64>() / weights.len() as f64;
        weights.iter_mut().for_each(|w| *w /= mean);

        let candidate = lsq::solve(&design, target, Some(&weights), terms)?;

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_STEP_HALVINGS {
            let trial: Vec<f64> = beta
                .iter()
                .zip(&candidate.coefficients)
                .map(|(b, c)| b + step * (c - b))
                .collect();
            let trial_resid = residuals(&design, target, &trial);
            let trial_objective = abs_sum(&trial_resid);
            if trial_objective <= objective {
                accepted = Some((trial, trial_resid, trial_objective));
                break;
            }
            step *= 0.5;
        }

        // No descent along the reweighted step: the iteration has reached its
        // fixed point to within the floor.
        let Some((trial, trial_resid, trial_objective)) = accepted else {
            converged = true;
            break;
        };

        let change = relative_change(&beta, &trial);
        beta = trial;
        resid = trial_resid;
        objective = trial_objective;
        trace.push(objective);
        iterations = iter;
        last = LsqSolution {
            coefficients: beta.clone(),
            r: candidate.r,
        };
        last_weights = weights;
        if change <= opts.tolerance {
            converged = true;
            break;
        }
    }

    if let Some(v) = vertex::descend(&design, table, &resid) {
        let vertex_objective = abs_sum(&v.residuals);
        if vertex_objective <= objective {
            beta = v.coefficients;
            trace.push(vertex_objective);
            converged |= v.optimal;
        }
    }

    last.coefficients = beta;
    let model = finish(
        FitMethod::Lar,
        table,
        terms,
        &design,
        last,
        last_weights,
        iterations,
        converged,
    );
    Ok((model, trace))
}

pub fn fit_bisquare(
    table: &FeatureTable,
    terms: &TermSet,
    opts: &IrlsOptions,
) -> Result<PolySurfaceModel> {
    opts.validate()?;
    let design = design_matrix(table, terms);
    let target = table.target();
    let mut last = lsq::solve(&design, target, None, terms)?;
    let mut resid = residuals(&design, target, &last.coefficients);
    let mut last_weights = Vec::new();
    let mut iterations = 0;
    let mut converged = false;

    for iter in 1..=opts.max_iterations {
        let scale = mad_sigma(&resid);
        if scale == 0.0 {
            // at least half the rows are fitted exactly
            converged = true;
            break;
        }
        let cutoff = opts.bisquare_constant * scale;
        let weights: Vec<f64> = resid.iter().map(|r| bisquare_weight(r / cutoff)).collect();

        let candidate = match lsq::solve(&design, target, Some(&weights), terms) {
            Ok(c) => c,
            // too few rows keep a non-zero weight; stay at the current iterate
            Err(Error::Rank { .. }) | Err(Error::DegreesOfFreedom { .. }) => break,
            Err(e) => return Err(e),
        };
        let change = relative_change(&last.coefficients, &candidate.coefficients);
        resid = residuals(&design, target, &candidate.coefficients);
        last = candidate;
        last_weights = weights;
        iterations = iter;
        if change <= opts.tolerance {
            converged = true;
            break;
        }
    }

    Ok(finish(
        FitMethod::Bisquare,
        table,
        terms,
        &design,
        last,
        last_weights,
        iterations,
        converged,
    ))
}

/// Tukey biweight `(1 - u^2)^2` on `|u| < 1`, zero outside.
pub fn bisquare_weight(u: f64) -> f64 {
    if u.abs() < 1.0 {
        let v = 1.0 - u * u;
        v * v
    } else {
        0.0
    }
}

#[allow(clippy::too_many_arguments)]
fn finish(
    method: FitMethod,
    table: &FeatureTable,
    terms: &TermSet,
    design: &DMatrix<f64>,
    solution: LsqSolution,
    weights: Vec<f64>,
    iterations: usize,
    converged: bool,
) -> PolySurfaceModel {
    let resid = residuals(design, table.target(), &solution.coefficients);
    let p = terms.len();
    let weighted_sse: f64 = if weights.is_empty() {
        resid.iter().map(|r| r * r).sum()
    } else {
        resid.iter().zip(&weights).map(|(r, w)| w * r * r).sum()
    };
    let n = table.len();
    let sigma = if n > p {
        (weighted_sse / (n - p) as f64).sqrt()
    } else {
        0.0
    };
    let bounds = bounds_from_variances(
        &solution.coefficients,
        &solution.unscaled_variances(),
        sigma,
        n,
        DEFAULT_CONFIDENCE,
    );
    PolySurfaceModel {
        terms: terms.clone(),
        coefficients: solution.coefficients,
        bounds,
        method,
        n_points: n,
        sigma,
        iterations,
        converged,
        weights,
    }
}

pub(crate) fn residuals(design: &DMatrix<f64>, target: &[f64], beta: &[f64]) -> Vec<f64> {
    design
        .row_iter()
        .zip(target)
        .map(|(row, t)| t - row.iter().zip(beta).map(|(a, b)| a * b).sum::<f64>())
        .collect()
}

fn residual_scale(resid: &[f64], p: usize) -> f64 {
    let n = resid.len();
    if n <= p {
        return 0.0;
    }
    (resid.iter().map(|r| r * r).sum::<f64>() / (n - p) as f64).sqrt()
}

fn abs_sum(resid: &[f64]) -> f64 {
    resid.iter().map(|r| r.abs()).sum()
}

fn relative_change(old: &[f64], new: &[f64]) -> f64 {
    let delta = old
        .iter()
        .zip(new)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let size = new.iter().map(|b| b.abs()).fold(0.0, f64::max);
    if delta == 0.0 {
        0.0
    } else if size == 0.0 {
        f64::INFINITY
    } else {
        delta / size
    }
}

pub fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// `median(|r - median(r)|) / 0.6745`.
pub fn mad_sigma(values: &[f64]) -> f64 {
    let center = median(values);
    let deviations: Vec<f64> = values.iter().map(|v| (v - center).abs()).collect();
    median(&deviations) / MAD_SCALE
}
