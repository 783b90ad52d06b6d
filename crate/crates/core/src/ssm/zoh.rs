use crate::error::{domain_err, Result};
use crate::numerics::{mat_exp, Matrix};

use super::ContinuousSystem;

/// Zero-order-hold discretization of a [`ContinuousSystem`] at one step size.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSystem {
    pub delta: f64,
    /// `e^{𝒜Δ}`, block lower triangular.
    pub a_bar: Matrix,
    /// `(d_h+d_v) × (d_psi+1)`; ψ columns first, then the input column.
    pub b_bar: Matrix,
    pub d_h: usize,
    pub d_v: usize,
    pub d_psi: usize,
}

impl DiscreteSystem {
    pub fn state_dim(&self) -> usize {
        self.d_h + self.d_v
    }

    pub fn a_h_bar(&self) -> Matrix {
        self.a_bar.block(0, self.d_h, 0, self.d_h)
    }

    pub fn a_v_bar(&self) -> Matrix {
        let n = self.state_dim();
        self.a_bar.block(self.d_h, n, self.d_h, n)
    }

    pub fn a_vh_bar(&self) -> Matrix {
        self.a_bar.block(self.d_h, self.state_dim(), 0, self.d_h)
    }

    /// Columns of `B̄` fed by ψ.
    pub fn b_psi(&self) -> Matrix {
        self.b_bar.block(0, self.state_dim(), 0, self.d_psi)
    }

    /// Column of `B̄` fed by the scalar input.
    pub fn b_x(&self) -> Vec<f64> {
        self.b_bar.column(self.d_psi)
    }
}

/// `Ā = e^{𝒜Δ}`, `B̄ = ∫₀^Δ e^{𝒜τ} dτ ℬ`, both read off `exp([[𝒜, ℬ], [0, 0]] Δ)`.
pub fn discretize_zoh(sys: &ContinuousSystem, delta: f64) -> Result<DiscreteSystem> {
    if !(delta > 0.0) || !delta.is_finite() {
        return domain_err(format!("step size must be positive and finite, got {delta}"));
    }
    sys.validate()?;
    let dims = sys.dims();
    let n = dims.state();
    let m = dims.d_psi + 1;
    let mut aug = Matrix::zeros(n + m, n + m);
    aug.set_block(0, 0, &sys.state_matrix().scale(delta));
    aug.set_block(0, n, &sys.input_matrix().scale(delta));
    let e = mat_exp(&aug)?;
    let mut a_bar = e.block(0, n, 0, n);
    // The exponential of a block lower-triangular matrix keeps the zero block; pin it exactly.
    for i in 0..dims.d_h {
        for j in dims.d_h..n {
            debug_assert!(a_bar[(i, j)].abs() < 1e-12);
        }
    }
    a_bar.set_block(0, dims.d_h, &Matrix::zeros(dims.d_h, dims.d_v));
    Ok(DiscreteSystem {
        delta,
        a_bar,
        b_bar: e.block(0, n, n, n + m),
        d_h: dims.d_h,
        d_v: dims.d_v,
        d_psi: dims.d_psi,
    })
}
