use super::Graph;
use crate::error::{domain_err, size_err, Result};
use crate::numerics::{spectral_radius, Matrix, Rng};
use crate::series::MultivariateSeries;

pub const DEFAULT_RHO: f64 = 0.9;
pub const DEFAULT_BURN_IN: usize = 200;

/// Stationary VAR(1) process `x[t] = W x[t−1] + ε[t]`, `ε ~ N(0, σ² I)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VarProcess {
    pub w: Matrix,
    pub noise_sigma: f64,
    pub spectral_radius: f64,
}

impl VarProcess {
    pub fn new(w: Matrix, noise_sigma: f64) -> Result<Self> {
        if !(noise_sigma >= 0.0) {
            return domain_err(format!("noise level must be nonnegative, got {noise_sigma}"));
        }
        let rho = spectral_radius(&w)?;
        if rho >= 1.0 {
            return domain_err(format!("transition matrix has spectral radius {rho} ≥ 1"));
        }
        Ok(Self { w, noise_sigma, spectral_radius: rho })
    }

    /// Row-normalized adjacency rescaled to spectral radius `rho`.
    pub fn from_graph(g: &Graph, rho: f64, noise_sigma: f64) -> Result<Self> {
        let a = g.adjacency();
        let n = g.num_nodes();
        let p = Matrix::from_fn(n, n, |i, j| {
            let deg: f64 = a.row(i).iter().sum();
            if deg > 0.0 { a[(i, j)] / deg } else { 0.0 }
        });
        let base = spectral_radius(&p)?;
        if base == 0.0 {
            return domain_err("graph has no edges");
        }
        Self::new(p.scale(rho / base), noise_sigma)
    }

    pub fn vars(&self) -> usize {
        self.w.rows()
    }

    /// Simulates from a zero state and drops the first `burn_in` steps.
    pub fn generate(&self, steps: usize, burn_in: usize, rng: &mut Rng) -> Result<MultivariateSeries> {
        if steps < 2 {
            return size_err(format!("need at least 2 steps, got {steps}"));
        }
        let n = self.vars();
        let mut x = vec![0.0; n];
        let mut next = vec![0.0; n];
        let mut out = MultivariateSeries::zeros(n, steps);
        for t in 0..burn_in + steps {
            self.w.matvec_into(&x, &mut next);
            for v in next.iter_mut() {
                *v += self.noise_sigma * rng.normal();
            }
            std::mem::swap(&mut x, &mut next);
            if t >= burn_in {
                for (c, v) in x.iter().enumerate() {
                    out.set(c, t - burn_in, *v);
                }
            }
        }
        Ok(out)
    }
}

/// VAR(1) series on `g` with the default radius 0.9 and burn-in of 200 steps.
pub fn var1_generate(g: &Graph, steps: usize, noise_sigma: f64, rng: &mut Rng) -> Result<MultivariateSeries> {
    VarProcess::from_graph(g, DEFAULT_RHO, noise_sigma)?.generate(steps, DEFAULT_BURN_IN, rng)
}
