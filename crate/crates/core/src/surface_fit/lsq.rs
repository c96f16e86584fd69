//! Weighted linear least squares through a Householder QR factorization.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::surface_fit::TermSet;

/// A column whose QR pivot falls below this fraction of its own norm is
/// treated as a linear combination of the columns before it.
const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone)]
pub(crate) struct LsqSolution {
    pub coefficients: Vec<f64>,
    /// Upper-triangular factor of `sqrt(W) X`.
    pub r: DMatrix<f64>,
}

impl LsqSolution {
    /// Diagonal of `(X' W X)^-1 = R^-1 R^-T`.
    pub fn unscaled_variances(&self) -> Vec<f64> {
        inverse_gram_diagonal(&self.r)
    }
}

pub(crate) fn inverse_gram_diagonal(r: &DMatrix<f64>) -> Vec<f64> {
    let p = r.ncols();
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(p, p))
        .expect("R has a non-zero diagonal after the rank check");
    (0..p)
        .map(|j| r_inv.row(j).iter().map(|v| v * v).sum())
        .collect()
}

/// Minimizes `sum_i w_i (target_i - x_i . beta)^2`; `weights = None` means
/// unit weights.
pub(crate) fn solve(
    design: &DMatrix<f64>,
    target: &[f64],
    weights: Option<&[f64]>,
    terms: &TermSet,
) -> Result<LsqSolution> {
    let (rows, cols) = design.shape();
    if rows < cols {
        return Err(Error::DegreesOfFreedom { rows, terms: cols });
    }

    let mut a = design.clone();
    let mut b = DVector::from_column_slice(target);
    if let Some(w) = weights {
        for (i, wi) in w.iter().enumerate() {
            let s = wi.sqrt();
            a.row_mut(i).scale_mut(s);
            b[i] *= s;
        }
    }

    let col_norms: Vec<f64> = a.column_iter().map(|c| c.norm()).collect();
    let qr = a.qr();
    let r = qr.r();

    let dependent: Vec<String> = (0..cols)
        .filter(|&j| {
            let pivot = r[(j, j)].abs();
            col_norms[j] == 0.0 || pivot <= RANK_TOLERANCE * col_norms[j]
        })
        .map(|j| terms.terms()[j].to_string())
        .collect();
    if !dependent.is_empty() {
        return Err(Error::Rank { columns: dependent });
    }

    qr.q_tr_mul(&mut b);
    let rhs = b.rows(0, cols).into_owned();
    let beta = r
        .solve_upper_triangular(&rhs)
        .expect("R has a non-zero diagonal after the rank check");

    Ok(LsqSolution {
        coefficients: beta.iter().copied().collect(),
        r,
    })
}
