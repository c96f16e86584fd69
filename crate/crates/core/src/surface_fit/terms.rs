use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::decompose::SeriesName;
use crate::surface_fit::FeatureTable;

/// One monomial `x^m * y^n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Term {
    /// Exponent of `x`.
    pub m: u32,
    /// Exponent of `y`.
    pub n: u32,
}

impl Term {
    pub const fn new(m: u32, n: u32) -> Self {
        Self { m, n }
    }

    /// `x^m * y^n`, with `0^0 = 1`.
    #[inline]
    pub fn eval(self, x: f64, y: f64) -> f64 {
        x.powi(self.m as i32) * y.powi(self.n as i32)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.m, self.n)
    }
}

impl FromStr for Term {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (m, n) = s
            .trim()
            .split_once(':')
            .ok_or_else(|| format!("term {s:?} is not of the form m:n"))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<u32>()
                .map_err(|_| format!("term {s:?} has a bad exponent {v:?}"))
        };
        Ok(Term::new(parse(m)?, parse(n)?))
    }
}

/// Ordered, duplicate-free list of monomials defining one surface.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermSet {
    terms: Vec<Term>,
}

impl TermSet {
    pub fn new(terms: Vec<Term>) -> Result<Self, String> {
        if terms.is_empty() {
            return Err("term set is empty".into());
        }
        let mut seen = HashSet::new();
        for t in &terms {
            if !seen.insert(*t) {
                return Err(format!("duplicate term {t}"));
            }
        }
        Ok(Self { terms })
    }

    fn from_pairs(pairs: &[(u32, u32)]) -> Self {
        Self::new(pairs.iter().map(|&(m, n)| Term::new(m, n)).collect())
            .expect("static term sets are valid")
    }

    /// Sparsity patterns of the published coefficient tables, read as
    /// `(m, n) = (row group, column)`.
    pub fn default_for(series: SeriesName) -> Self {
        match series {
            SeriesName::Volatility => Self::from_pairs(&[(0, 0), (0, 1), (0, 2), (1, 0), (1, 1)]),
            SeriesName::Trend => Self::from_pairs(&[
                (0, 0),
                (0, 1),
                (1, 0),
                (1, 1),
                (2, 0),
                (2, 1),
                (3, 0),
                (3, 1),
                (4, 0),
                (4, 1),
                (5, 0),
            ]),
            SeriesName::Seasonal => {
                Self::from_pairs(&[(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (2, 0)])
            }
            SeriesName::Remainder => Self::from_pairs(&[
                (0, 0),
                (0, 1),
                (0, 2),
                (1, 0),
                (1, 1),
                (1, 2),
                (2, 0),
                (2, 1),
                (3, 0),
            ]),
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn iter(&self) -> impl Iterator<Item = Term> + '_ {
        self.terms.iter().copied()
    }

    pub fn position(&self, term: Term) -> Option<usize> {
        self.terms.iter().position(|t| *t == term)
    }
}

impl fmt::Display for TermSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

impl FromStr for TermSet {
    type Err = String;

    /// Comma-separated `m:n` pairs, e.g. `0:0,0:1,1:0`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let terms = s
            .split(',')
            .filter(|p| !p.trim().is_empty())
            .map(str::parse)
            .collect::<Result<Vec<Term>, _>>()?;
        TermSet::new(terms)
    }
}

/// Rows are table rows, columns are terms: entry `(i, j) = x_i^m_j * y_i^n_j`.
pub fn design_matrix(table: &FeatureTable, terms: &TermSet) -> DMatrix<f64> {
    DMatrix::from_fn(table.len(), terms.len(), |i, j| {
        terms.terms[j].eval(table.x()[i], table.y()[i])
    })
}
