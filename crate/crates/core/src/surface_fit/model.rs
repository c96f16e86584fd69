use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::surface_fit::{Term, TermSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitMethod {
    Ols,
    Lar,
    Bisquare,
}

impl FitMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            FitMethod::Ols => "ols",
            FitMethod::Lar => "lar",
            FitMethod::Bisquare => "bisquare",
        }
    }
}

impl fmt::Display for FitMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FitMethod {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "ols" => Ok(FitMethod::Ols),
            "lar" => Ok(FitMethod::Lar),
            "bisquare" => Ok(FitMethod::Bisquare),
            other => Err(format!(
                "unknown fit method {other:?} (expected ols, lar or bisquare)"
            )),
        }
    }
}

/// A fitted surface `f(x, y) = sum p_mn x^m y^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolySurfaceModel {
    pub terms: TermSet,
    pub coefficients: Vec<f64>,
    /// `(lower, upper)` per term. Unbounded when the fit has no residual
    /// degrees of freedom.
    pub bounds: Vec<(f64, f64)>,
    pub method: FitMethod,
    pub n_points: usize,
    pub sigma: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Final IRLS weights, one per fitted row. Empty means unit weights; not
    /// part of the serialized document.
    pub weights: Vec<f64>,
}

impl PolySurfaceModel {
    /// A model with the given coefficients and no fit metadata; bounds collapse
    /// onto the coefficients.
    pub fn from_coefficients(terms: TermSet, coefficients: Vec<f64>) -> Result<Self> {
        if terms.len() != coefficients.len() {
            return Err(Error::Document(format!(
                "{} terms but {} coefficients",
                terms.len(),
                coefficients.len()
            )));
        }
        Ok(Self {
            bounds: coefficients.iter().map(|&c| (c, c)).collect(),
            terms,
            coefficients,
            method: FitMethod::Ols,
            n_points: 0,
            sigma: 0.0,
            iterations: 0,
            converged: true,
            weights: Vec::new(),
        })
    }

    pub fn coefficient(&self, term: Term) -> Option<f64> {
        self.terms.position(term).map(|i| self.coefficients[i])
    }

    pub fn to_document(&self) -> String {
        let doc = ModelDocument {
            method: self.method,
            terms: self.terms.iter().map(|t| t.to_string()).collect(),
            coefficients: self.coefficients.clone(),
            bounds: self
                .bounds
                .iter()
                .map(|&(lo, hi)| [finite(lo), finite(hi)])
                .collect(),
            sigma: self.sigma,
            n_points: self.n_points,
            iterations: self.iterations,
            converged: self.converged,
        };
        let mut text = serde_json::to_string_pretty(&doc).expect("model document serializes");
        text.push('\n');
        text
    }

    pub fn from_document(text: &str) -> Result<Self> {
        let doc: ModelDocument =
            serde_json::from_str(text).map_err(|e| Error::Document(e.to_string()))?;
        let terms = doc
            .terms
            .iter()
            .map(|s| s.parse::<Term>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .and_then(TermSet::new)
            .map_err(Error::Document)?;
        if doc.coefficients.len() != terms.len() || doc.bounds.len() != terms.len() {
            return Err(Error::Document(format!(
                "{} terms, {} coefficients and {} bounds",
                terms.len(),
                doc.coefficients.len(),
                doc.bounds.len()
            )));
        }
        if doc.coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::Document("non-finite coefficient".into()));
        }
        let bounds = doc
            .bounds
            .iter()
            .map(|[lo, hi]| (lo.unwrap_or(f64::NEG_INFINITY), hi.unwrap_or(f64::INFINITY)))
            .collect();
        Ok(Self {
            terms,
            coefficients: doc.coefficients,
            bounds,
            method: doc.method,
            n_points: doc.n_points,
            sigma: doc.sigma,
            iterations: doc.iterations,
            converged: doc.converged,
            weights: Vec::new(),
        })
    }
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDocument {
    method: FitMethod,
    terms: Vec<String>,
    coefficients: Vec<f64>,
    bounds: Vec<[Option<f64>; 2]>,
    sigma: f64,
    n_points: usize,
    iterations: usize,
    converged: bool,
}

/// `sum p_mn x^m y^n` over the model's terms.
pub fn evaluate_surface(model: &PolySurfaceModel, x: f64, y: f64) -> f64 {
    model
        .terms
        .iter()
        .zip(&model.coefficients)
        .map(|(t, p)| p * t.eval(x, y))
        .sum()
}
