use std::cmp::Ordering;

use crate::error::{dim_err, domain_err, size_err, Error, Result};
use crate::numerics::Matrix;

fn row_order(f: &Matrix, y: &Matrix, a: usize, b: usize) -> Ordering {
    f.row(a)
        .iter()
        .chain(y.row(a))
        .zip(f.row(b).iter().chain(y.row(b)))
        .map(|(p, q)| p.total_cmp(q))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Ridge weights `(FᵀF + λI)⁻¹ FᵀY` via Cholesky.
///
/// Rows are accumulated in a canonical order fixed by their contents, so reordering the
/// samples leaves the weights bit-identical.
pub fn fit_ridge_readout(features: &Matrix, targets: &Matrix, lambda: f64) -> Result<Matrix> {
    let (n, d) = features.shape();
    let m = targets.cols();
    if n == 0 {
        return size_err("ridge fit needs at least one sample");
    }
    if targets.rows() != n {
        return dim_err(format!("{n} feature rows but {} target rows", targets.rows()));
    }
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return domain_err(format!("ridge penalty must be finite and nonnegative, got {lambda}"));
    }
    if !features.is_finite() || !targets.is_finite() {
        return domain_err("ridge inputs contain non-finite values");
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| row_order(features, targets, a, b));

    let mut gram = vec![0.0; d * d];
    let mut rhs = vec![0.0; d * m];
    for &r in &order {
        let f = features.row(r);
        let y = targets.row(r);
        for i in 0..d {
            let fi = f[i];
            for j in 0..=i {
                gram[i * d + j] += fi * f[j];
            }
            for k in 0..m {
                rhs[i * m + k] += fi * y[k];
            }
        }
    }
    for i in 0..d {
        gram[i * d + i] += lambda;
    }

    // Lower Cholesky factor in place.
    let max_diag = (0..d).map(|i| gram[i * d + i]).fold(0.0, f64::max);
    let tol = 1e-12 * max_diag.max(f64::MIN_POSITIVE);
    for j in 0..d {
        let mut diag = gram[j * d + j];
        for k in 0..j {
            diag -= gram[j * d + k] * gram[j * d + k];
        }
        if !(diag > tol) {
            return Err(Error::Numerical {
                message: format!("normal matrix is singular at column {j}; use a positive ridge penalty"),
                residual: diag,
            });
        }
        let l = diag.sqrt();
        gram[j * d + j] = l;
        for i in j + 1..d {
            let mut v = gram[i * d + j];
            for k in 0..j {
                v -= gram[i * d + k] * gram[j * d + k];
            }
            gram[i * d + j] = v / l;
        }
    }
    let mut w = rhs;
    for k in 0..m {
        for i in 0..d {
            let mut v = w[i * m + k];
            for j in 0..i {
                v -= gram[i * d + j] * w[j * m + k];
            }
            w[i * m + k] = v / gram[i * d + i];
        }
        for i in (0..d).rev() {
            let mut v = w[i * m + k];
            for j in i + 1..d {
                v -= gram[j * d + i] * w[j * m + k];
            }
            w[i * m + k] = v / gram[i * d + i];
        }
    }
    Matrix::new(d, m, w)
}
