use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::surface_fit::lsq;
use crate::surface_fit::{design_matrix, FeatureTable, PolySurfaceModel};

/// Two-sided Student-t quantile `t_{1 - (1 - level)/2, df}`.
pub fn t_quantile(level: f64, df: usize) -> f64 {
    let dist = StudentsT::new(0.0, 1.0, df as f64).expect("df is positive");
    dist.inverse_cdf(1.0 - (1.0 - level) / 2.0)
}

/// `coef +/- t * sigma * sqrt(v)`; unbounded when there are no residual
/// degrees of freedom.
pub(crate) fn bounds_from_variances(
    coefficients: &[f64],
    unscaled_variances: &[f64],
    sigma: f64,
    n: usize,
    level: f64,
) -> Vec<(f64, f64)> {
    let p = coefficients.len();
    if n <= p {
        return vec![(f64::NEG_INFINITY, f64::INFINITY); p];
    }
    let t = t_quantile(level, n - p);
    coefficients
        .iter()
        .zip(unscaled_variances)
        .map(|(&c, &v)| {
            let half = t * sigma * v.sqrt();
            (c - half, c + half)
        })
        .collect()
}

/// Per-term confidence bounds at `level`, using the model's final IRLS
/// weights (unit weights for OLS) and its residual scale.
pub fn confidence_bounds(
    model: &PolySurfaceModel,
    table: &FeatureTable,
    level: f64,
) -> Result<Vec<(f64, f64)>> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Config(format!(
            "confidence level must lie in (0, 1), got {level}"
        )));
    }
    let (n, p) = (table.len(), model.terms.len());
    if n <= p {
        return Err(Error::DegreesOfFreedom { rows: n, terms: p });
    }
    let design = design_matrix(table, &model.terms);
    let weights = (model.weights.len() == n).then_some(model.weights.as_slice());
    let solution = lsq::solve(&design, table.target(), weights, &model.terms)?;
    Ok(bounds_from_variances(
        &model.coefficients,
        &solution.unscaled_variances(),
        model.sigma,
        n,
        level,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface_fit::fit_ols;

    #[test]
    fn known_quantiles() {
        assert!((t_quantile(0.95, 1) - 12.706204736).abs() < 1e-6);
        assert!((t_quantile(0.95, 10) - 2.228138852).abs() < 1e-6);
        assert!((t_quantile(0.90, 30) - 1.697260887).abs() < 1e-6);
    }

    #[test]
    fn hand_computed_intercept_interval() {
        // constant fit to [1, 2, 3, 6]: mean 3, s^2 = 14/3, se = sqrt(s^2 / 4)
        let t = FeatureTable::new(
            vec![0.0; 4],
            vec![0.0; 4],
            vec![1.0, 2.0, 3.0, 6.0],
            vec![1, 2, 3, 4],
        )
        .unwrap();
        let m = fit_ols(&t, &"0:0".parse().unwrap()).unwrap();
        let b = confidence_bounds(&m, &t, 0.95).unwrap();
        let half = 3.182446305 * (14.0f64 / 3.0 / 4.0).sqrt();
        assert!((b[0].0 - (3.0 - half)).abs() < 1e-6);
        assert!((b[0].1 - (3.0 + half)).abs() < 1e-6);
        assert_eq!(b, m.bounds);
    }

    #[test]
    fn no_degrees_of_freedom() {
        let t =
            FeatureTable::new(vec![0.0, 1.0], vec![0.0; 2], vec![1.0, 2.0], vec![1, 2]).unwrap();
        let m = fit_ols(&t, &"0:0,1:0".parse().unwrap()).unwrap();
        assert!(matches!(
            confidence_bounds(&m, &t, 0.95),
            Err(Error::DegreesOfFreedom { rows: 2, terms: 2 })
        ));
    }
}
