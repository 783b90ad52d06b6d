use crate::error::{dim_err, size_err, Result};
use crate::numerics::Matrix;

use super::DiscreteSystem;

/// Impulse responses from ψ and from the input to the readout.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvolutionKernels {
    /// `k_psi[k]` has `d_psi` entries.
    pub k_psi: Vec<Vec<f64>>,
    pub k_x: Vec<f64>,
}

impl ConvolutionKernels {
    pub fn len(&self) -> usize {
        self.k_x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k_x.is_empty()
    }
}

/// `K[k] = [C_h, C_v] Ā^k B̄` split into the ψ block and the input column.
pub fn convolution_kernels(
    dsys: &DiscreteSystem,
    c_h: &Matrix,
    c_v: &Matrix,
    length: usize,
) -> Result<ConvolutionKernels> {
    if length == 0 {
        return size_err("kernel length must be at least 1");
    }
    if c_h.shape() != (1, dsys.d_h) || c_v.shape() != (1, dsys.d_v) {
        return dim_err(format!(
            "readout shapes {:?}, {:?} do not match state ({}, {})",
            c_h.shape(),
            c_v.shape(),
            dsys.d_h,
            dsys.d_v
        ));
    }
    let n = dsys.state_dim();
    // Propagate the row vector r_k = readout · Ā^k, then r_k · B̄.
    let mut r: Vec<f64> = c_h.as_slice().iter().chain(c_v.as_slice()).copied().collect();
    let at = dsys.a_bar.transpose();
    let bt = dsys.b_bar.transpose();
    let mut k_psi = Vec::with_capacity(length);
    let mut k_x = Vec::with_capacity(length);
    let mut next = vec![0.0; n];
    for _ in 0..length {
        let mut row = bt.matvec(&r)?;
        k_x.push(row.pop().expect("input column"));
        k_psi.push(row);
        at.matvec_into(&r, &mut next);
        std::mem::swap(&mut r, &mut next);
    }
    Ok(ConvolutionKernels { k_psi, k_x })
}

/// `y[t] = Σ_{k ≤ t} K_ψ[k]·ψ[t−k] + K_x[k]·x[t−k]` from a zero initial state.
pub fn convolve(kernels: &ConvolutionKernels, psi: &[Vec<f64>], x: &[f64]) -> Result<Vec<f64>> {
    let t_len = x.len();
    if psi.len() != t_len {
        return dim_err(format!("ψ stream has {} steps, input has {t_len}", psi.len()));
    }
    if t_len > kernels.len() {
        return size_err(format!("kernels of length {} cannot cover {t_len} steps", kernels.len()));
    }
    let d_psi = kernels.k_psi.first().map_or(0, Vec::len);
    if let Some(bad) = psi.iter().find(|p| p.len() != d_psi) {
        return dim_err(format!("ψ entry has width {}, kernel expects {d_psi}", bad.len()));
    }
    Ok((0..t_len)
        .map(|t| {
            (0..=t)
                .map(|k| {
                    let s = t - k;
                    let g: f64 = kernels.k_psi[k].iter().zip(&psi[s]).map(|(a, b)| a * b).sum();
                    g + kernels.k_x[k] * x[s]
                })
                .sum()
        })
        .collect())
}
