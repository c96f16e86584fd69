use crate::error::{Error, Result};

/// Where a surface input coordinate comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureSource {
    /// `t / T`, the 1-based trading-day index scaled into `(0, 1]`.
    TimeIndexScaled,
    /// The series value `lag` trading days earlier.
    LaggedValue,
}

/// Maps a univariate series onto `(x, y) -> target` regression rows.
///
/// The default surface is drawn over scaled time and the lag-1 level, with
/// the current value as the response.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeatureSpec {
    pub x_source: FeatureSource,
    pub y_source: FeatureSource,
    pub lag: usize,
}

impl Default for FeatureSpec {
    fn default() -> Self {
        Self {
            x_source: FeatureSource::TimeIndexScaled,
            y_source: FeatureSource::LaggedValue,
            lag: 1,
        }
    }
}

/// Complete, finite regression rows with the source index each came from.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    x: Vec<f64>,
    y: Vec<f64>,
    target: Vec<f64>,
    provenance: Vec<usize>,
}

impl FeatureTable {
    pub fn new(x: Vec<f64>, y: Vec<f64>, target: Vec<f64>, provenance: Vec<usize>) -> Result<Self> {
        let n = x.len();
        if y.len() != n || target.len() != n || provenance.len() != n {
            return Err(Error::Format(
                "feature columns have different lengths".into(),
            ));
        }
        if x.iter().chain(&y).chain(&target).any(|v| !v.is_finite()) {
            return Err(Error::Format(
                "feature table holds a non-finite value".into(),
            ));
        }
        Ok(Self {
            x,
            y,
            target,
            provenance,
        })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    /// 1-based index `t` of the series entry each row predicts.
    pub fn provenance(&self) -> &[usize] {
        &self.provenance
    }

    /// Rows at `indices`, in the given order.
    pub fn select(&self, indices: &[usize]) -> FeatureTable {
        FeatureTable {
            x: indices.iter().map(|&i| self.x[i]).collect(),
            y: indices.iter().map(|&i| self.y[i]).collect(),
            target: indices.iter().map(|&i| self.target[i]).collect(),
            provenance: indices.iter().map(|&i| self.provenance[i]).collect(),
        }
    }

    pub fn slice(&self, range: std::ops::Range<usize>) -> FeatureTable {
        FeatureTable {
            x: self.x[range.clone()].to_vec(),
            y: self.y[range.clone()].to_vec(),
            target: self.target[range.clone()].to_vec(),
            provenance: self.provenance[range].to_vec(),
        }
    }

    /// Appends the rows of `other` after the rows of `self`.
    pub fn concat(&self, other: &FeatureTable) -> FeatureTable {
        let join = |a: &[f64], b: &[f64]| a.iter().chain(b).copied().collect();
        FeatureTable {
            x: join(&self.x, &other.x),
            y: join(&self.y, &other.y),
            target: join(&self.target, &other.target),
            provenance: self
                .provenance
                .iter()
                .chain(&other.provenance)
                .copied()
                .collect(),
        }
    }

    /// `(min, max)` of `x` and of `y`.
    pub fn ranges(&self) -> Option<((f64, f64), (f64, f64))> {
        let span = |v: &[f64]| {
            v.iter()
                .fold(None, |acc: Option<(f64, f64)>, &x| match acc {
                    None => Some((x, x)),
                    Some((lo, hi)) => Some((lo.min(x), hi.max(x))),
                })
        };
        Some((span(&self.x)?, span(&self.y)?))
    }
}

pub fn build_feature_table(series: &[Option<f64>], spec: &FeatureSpec) -> Result<FeatureTable> {
    if spec.lag == 0 {
        return Err(Error::Config("lag must be >= 1".into()));
    }
    if spec.x_source == spec.y_source {
        return Err(Error::Config(
            "x and y must come from different sources".into(),
        ));
    }
    let total = series.len();
    if total <= spec.lag {
        return Err(Error::InsufficientData(format!(
            "series of length {total} is too short for lag {}",
            spec.lag
        )));
    }

    let source = |kind: FeatureSource, i: usize| match kind {
        FeatureSource::TimeIndexScaled => Some((i + 1) as f64 / total as f64),
        FeatureSource::LaggedValue => series[i - spec.lag],
    };

    let (mut x, mut y, mut target, mut provenance) = (vec![], vec![], vec![], vec![]);
    for (i, t) in series.iter().enumerate().take(total).skip(spec.lag) {
        if let (Some(xv), Some(yv), Some(tv)) =
            (source(spec.x_source, i), source(spec.y_source, i), *t)
        {
            x.push(xv);
            y.push(yv);
            target.push(tv);
            provenance.push(i + 1);
        }
    }
    if x.is_empty() {
        return Err(Error::InsufficientData("no complete feature rows".into()));
    }
    FeatureTable::new(x, y, target, provenance)
}
