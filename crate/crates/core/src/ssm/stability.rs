use crate::error::{domain_err, Result};
use crate::numerics::{mat_exp, spectral_radius};

use super::ContinuousSystem;

/// Spectral radii of the discretized diagonal blocks at one step size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityReport {
    pub delta: f64,
    pub rho_h: f64,
    pub rho_v: f64,
    pub pass: bool,
}

pub fn certify_stability(sys: &ContinuousSystem, deltas: &[f64]) -> Result<Vec<StabilityReport>> {
    if let Some(&bad) = deltas.iter().find(|&&d| !(d > 0.0)) {
        return domain_err(format!("step sizes must be positive, got {bad}"));
    }
    deltas
        .iter()
        .map(|&delta| {
            let rho_h = spectral_radius(&mat_exp(&sys.a_h.scale(delta))?)?;
            let rho_v = spectral_radius(&mat_exp(&sys.a_v.scale(delta))?)?;
            Ok(StabilityReport { delta, rho_h, rho_v, pass: rho_h < 1.0 && rho_v < 1.0 })
        })
        .collect()
}
