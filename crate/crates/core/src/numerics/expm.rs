use super::Matrix;
use crate::error::{dim_err, domain_err, Result};

const TAYLOR_ORDER: u32 = 12;
/// Scaling target for `‖A / 2^s‖₁`.
const SCALED_NORM: f64 = 0.5;

/// Matrix exponential `e^A` by scaling and squaring around a degree-12 Taylor core.
///
/// Exactly diagonal inputs take an elementwise fast path. Products of block lower-triangular
/// matrices keep exact zeros in their upper-right blocks, so triangular structure survives.
pub fn mat_exp(a: &Matrix) -> Result<Matrix> {
    if !a.is_square() {
        return dim_err(format!("mat_exp needs a square matrix, got {}×{}", a.rows(), a.cols()));
    }
    if !a.is_finite() {
        return domain_err("mat_exp input has a non-finite entry");
    }
    let n = a.rows();
    if a.is_diagonal() {
        return Ok(Matrix::diag(&a.diagonal().iter().map(|v| v.exp()).collect::<Vec<_>>()));
    }

    let norm = a.norm1();
    let squarings = if norm > SCALED_NORM { (norm / SCALED_NORM).log2().ceil() as i32 } else { 0 };
    let scaled = a.scale(0.5f64.powi(squarings));

    // Horner: I + B(I + B/2(I + B/3(...)))
    let eye = Matrix::identity(n);
    let mut acc = eye.clone();
    for k in (1..=TAYLOR_ORDER).rev() {
        acc = eye.add(&scaled.matmul(&acc)?.scale(1.0 / f64::from(k)))?;
    }
    for _ in 0..squarings {
        acc = acc.matmul(&acc)?;
    }
    if !acc.is_finite() {
        return domain_err("mat_exp overflowed");
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Rng;

    #[test]
    fn zero_gives_identity() {
        assert_eq!(mat_exp(&Matrix::zeros(3, 3)).unwrap(), Matrix::identity(3));
    }

    #[test]
    fn scalar_matches_exp() {
        let e = mat_exp(&Matrix::diag(&[-0.5])).unwrap();
        assert!((e[(0, 0)] - 0.6065306597126334).abs() < 1e-15);
        assert!((e[(0, 0)] - 0.6065306597).abs() < 1e-10);
    }

    #[test]
    fn nilpotent_series_terminates() {
        let n = Matrix::from_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let e = mat_exp(&n).unwrap();
        assert!(e.max_abs_diff(&Matrix::from_rows(&[&[1.0, 1.0], &[0.0, 1.0]])) < 1e-15);
    }

    #[test]
    fn rotation_generator() {
        // exp([[0, θ], [-θ, 0]]) = [[cos θ, sin θ], [-sin θ, cos θ]]
        let th = 2.3_f64;
        let e = mat_exp(&Matrix::from_rows(&[&[0.0, th], &[-th, 0.0]])).unwrap();
        let want = Matrix::from_rows(&[&[th.cos(), th.sin()], &[-th.sin(), th.cos()]]);
        assert!(e.max_abs_diff(&want) < 1e-13);
    }

    #[test]
    fn errors() {
        assert!(matches!(mat_exp(&Matrix::zeros(2, 3)), Err(crate::Error::Dimension(_))));
    }

    #[test]
    fn inverse_pair_multiplies_to_identity() {
        let mut rng = Rng::new(11);
        for n in 1..=16 {
            let a = Matrix::from_fn(n, n, |_, _| rng.uniform(-1.0, 1.0));
            let prod = mat_exp(&a).unwrap().matmul(&mat_exp(&a.scale(-1.0)).unwrap()).unwrap();
            assert!(prod.max_abs_diff(&Matrix::identity(n)) < 1e-8, "n = {n}");
        }
    }
}
