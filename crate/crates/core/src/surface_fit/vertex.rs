//! Exact finish for LAR.
//!
//! An L1 regression optimum sits at a vertex: `p` rows fitted exactly. From
//! such a basis, each edge of the polytope frees one basis row; along it
//! the objective is convex piecewise linear, so the best point is at the
//! breakpoint where its slope turns non-negative, and that row enters the
//! basis. Once no edge descends, the vertex is optimal.

use nalgebra::{DMatrix, DVector};

use crate::surface_fit::FeatureTable;

const MAX_EXCHANGES_PER_TERM: usize = 50;

pub(crate) struct Vertex {
    pub coefficients: Vec<f64>,
    pub residuals: Vec<f64>,
    /// No descending edge was left.
    pub optimal: bool,
}

/// Descends from the `p` rows with the smallest `|resid|`. `None` when that
/// start is singular.
pub(crate) fn descend(
    design: &DMatrix<f64>,
    table: &FeatureTable,
    resid: &[f64],
) -> Option<Vertex> {
    let (n, p) = design.shape();
    if n <= p {
        return None;
    }
    let provenance = table.provenance();
    let target = table.target();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        resid[i]
            .abs()
            .total_cmp(&resid[j].abs())
            .then(provenance[i].cmp(&provenance[j]))
    });
    let mut basis = order[..p].to_vec();

    let mut optimal = false;
    for _ in 0..MAX_EXCHANGES_PER_TERM * p {
        // basis in provenance order so the arithmetic ignores row order
        basis.sort_by_key(|&i| provenance[i]);
        let a = DMatrix::from_fn(p, p, |r, c| design[(basis[r], c)]);
        let inverse = a.try_inverse()?;
        let beta = &inverse * DVector::from_iterator(p, basis.iter().map(|&i| target[i]));
        let r = residual_vector(design, target, &beta);

        let Some((leaving, sign, slope, g)) = steepest_edge(design, &inverse, &basis, &r) else {
            optimal = true;
            break;
        };
        let Some(entering) = line_search(&basis, &r, &g, sign, slope) else {
            // unbounded descent cannot happen for L1; treat as numerical noise
            optimal = true;
            break;
        };
        basis[leaving] = entering;
    }

    basis.sort_by_key(|&i| provenance[i]);
    let a = DMatrix::from_fn(p, p, |r, c| design[(basis[r], c)]);
    let beta = a
        .lu()
        .solve(&DVector::from_iterator(p, basis.iter().map(|&i| target[i])))?;
    if beta.iter().any(|b| !b.is_finite()) {
        return None;
    }
    let residuals = residual_vector(design, target, &beta);
    Some(Vertex {
        coefficients: beta.iter().copied().collect(),
        residuals: residuals.iter().copied().collect(),
        optimal,
    })
}

fn residual_vector(design: &DMatrix<f64>, target: &[f64], beta: &DVector<f64>) -> DVector<f64> {
    DVector::from_column_slice(target) - design * beta
}

/// Most negative directional derivative over the `2p` edges. Returns the
/// basis slot to free, the direction sign, the slope and the per-row rates
/// `g_i = x_i . d` for that edge.
fn steepest_edge(
    design: &DMatrix<f64>,
    inverse: &DMatrix<f64>,
    basis: &[usize],
    r: &DVector<f64>,
) -> Option<(usize, f64, f64, DVector<f64>)> {
    let mut best: Option<(usize, f64, f64, DVector<f64>)> = None;
    for j in 0..basis.len() {
        let g = design * inverse.column(j);
        let (mut up, mut down, mut scale) = (1.0, 1.0, 1.0);
        for (i, (&gi, &ri)) in g.iter().zip(r.iter()).enumerate() {
            if basis.contains(&i) {
                continue;
            }
            scale += gi.abs();
            if ri == 0.0 {
                up += gi.abs();
                down += gi.abs();
            } else {
                up -= gi * ri.signum();
                down += gi * ri.signum();
            }
        }
        for (sign, slope) in [(1.0, up), (-1.0, down)] {
            if slope < -1e-12 * scale && best.as_ref().is_none_or(|b| slope < b.2) {
                best = Some((j, sign, slope, g.clone()));
            }
        }
    }
    best
}

/// Breakpoint along `beta + t * sign * d`, `t > 0`, where the slope first
/// becomes non-negative; the row hitting zero there enters the basis.
fn line_search(
    basis: &[usize],
    r: &DVector<f64>,
    g: &DVector<f64>,
    sign: f64,
    mut slope: f64,
) -> Option<usize> {
    let mut breaks: Vec<(f64, usize)> = (0..r.len())
        .filter(|i| !basis.contains(i))
        .filter_map(|i| {
            let rate = sign * g[i];
            let t = r[i] / rate;
            (rate != 0.0 && t > 0.0).then_some((t, i))
        })
        .collect();
    breaks.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    for (_, i) in breaks {
        slope += 2.0 * g[i].abs();
        if slope >= 0.0 {
            return Some(i);
        }
    }
    None
}
