//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Normal};
use volfit::surface_fit::{FeatureTable, TermSet};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Centred moving average written out index by index: for each output, walk
/// the window left to right over in-range, present entries.
pub fn brute_moving_average(series: &[Option<f64>], window: usize) -> Vec<Option<f64>> {
    let k = (window / 2) as isize;
    let n = series.len() as isize;
    let mut out = Vec::with_capacity(series.len());
    for i in 0..n {
        let mut sum = 0.0;
        let mut count = 0usize;
        let mut j = i - k;
        while j <= i + k {
            if j >= 0 && j < n {
                if let Some(v) = series[j as usize] {
                    sum += v;
                    count += 1;
                }
            }
            j += 1;
        }
        out.push(if count == 0 {
            None
        } else {
            Some(sum / count as f64)
        });
    }
    out
}

pub fn brute_kz(series: &[Option<f64>], window: usize, passes: usize) -> Vec<Option<f64>> {
    let mut current = series.to_vec();
    for _ in 0..passes {
        current = brute_moving_average(&current, window);
    }
    current
}

/// Solves `(X'X) b = X'y` by Gaussian elimination with partial pivoting.
pub fn normal_equations(rows: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let p = rows[0].len();
    let mut a = vec![vec![0.0; p + 1]; p];
    for (row, &t) in rows.iter().zip(y) {
        for i in 0..p {
            for j in 0..p {
                a[i][j] += row[i] * row[j];
            }
            a[i][p] += row[i] * t;
        }
    }
    for col in 0..p {
        let pivot = (col..p)
            .max_by(|&r1, &r2| a[r1][col].abs().total_cmp(&a[r2][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        let (top, below) = a.split_at_mut(col + 1);
        let pivot_row = &top[col];
        for row in below {
            let f = row[col] / pivot_row[col];
            for (dst, src) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                *dst -= f * src;
            }
        }
    }
    let mut b = vec![0.0; p];
    for i in (0..p).rev() {
        let s: f64 = (i + 1..p).map(|j| a[i][j] * b[j]).sum();
        b[i] = (a[i][p] - s) / a[i][i];
    }
    b
}

/// Monomial values of one point, term by term.
pub fn monomials(terms: &TermSet, x: f64, y: f64) -> Vec<f64> {
    terms
        .iter()
        .map(|t| {
            let mut v = 1.0;
            for _ in 0..t.m {
                v *= x;
            }
            for _ in 0..t.n {
                v *= y;
            }
            v
        })
        .collect()
}

pub fn surface_value(terms: &TermSet, coefs: &[f64], x: f64, y: f64) -> f64 {
    monomials(terms, x, y)
        .iter()
        .zip(coefs)
        .map(|(m, c)| m * c)
        .sum()
}

/// Rows with `x = (i + 1) / n`, `y` uniform on `[-1, 1]` and targets from the
/// planted coefficients plus Gaussian noise of scale `noise`.
pub fn planted_table(
    terms: &TermSet,
    coefs: &[f64],
    n: usize,
    noise: f64,
    rng: &mut StdRng,
) -> FeatureTable {
    let normal = Normal::new(0.0, 1.0).unwrap();
    let x: Vec<f64> = (0..n).map(|i| (i + 1) as f64 / n as f64).collect();
    let y: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let target = x
        .iter()
        .zip(&y)
        .map(|(&xi, &yi)| surface_value(terms, coefs, xi, yi) + noise * normal.sample(rng))
        .collect();
    FeatureTable::new(x, y, target, (1..=n).collect()).unwrap()
}

/// Sum of absolute residuals of a line `a + b x`.
pub fn l1_line_objective(xs: &[f64], ys: &[f64], a: f64, b: f64) -> f64 {
    xs.iter().zip(ys).map(|(x, y)| (y - a - b * x).abs()).sum()
}

/// Coarse-then-fine grid search for the L1 line.
pub fn l1_line_grid(xs: &[f64], ys: &[f64], center: (f64, f64), radius: f64) -> (f64, f64) {
    let mut best = center;
    let mut r = radius;
    for _ in 0..6 {
        let steps = 40;
        let (ca, cb) = best;
        let mut best_obj = l1_line_objective(xs, ys, ca, cb);
        for i in 0..=steps {
            for j in 0..=steps {
                let a = ca - r + 2.0 * r * i as f64 / steps as f64;
                let b = cb - r + 2.0 * r * j as f64 / steps as f64;
                let obj = l1_line_objective(xs, ys, a, b);
                if obj < best_obj {
                    best_obj = obj;
                    best = (a, b);
                }
            }
        }
        r /= 8.0;
    }
    best
}
