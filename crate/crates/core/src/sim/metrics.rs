use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Result};
use crate::numerics::canonical_sum;
use crate::series::MultivariateSeries;

pub const MAPE_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Metrics {
    pub mae: f64,
    /// Percent.
    pub mape: f64,
    pub mse: f64,
}

/// Errors over all entries; each mean uses an order-insensitive sum.
pub fn metrics_slices(pred: &[f64], truth: &[f64]) -> Result<Metrics> {
    if pred.len() != truth.len() || pred.is_empty() {
        return dim_err(format!("cannot compare {} predictions with {} targets", pred.len(), truth.len()));
    }
    let n = pred.len() as f64;
    let mut abs: Vec<f64> = pred.iter().zip(truth).map(|(p, y)| (p - y).abs()).collect();
    let mut sq: Vec<f64> = abs.iter().map(|e| e * e).collect();
    let mut pct: Vec<f64> = abs.iter().zip(truth).map(|(e, y)| e / y.abs().max(MAPE_FLOOR)).collect();
    Ok(Metrics {
        mae: canonical_sum(&mut abs) / n,
        mape: 100.0 * canonical_sum(&mut pct) / n,
        mse: canonical_sum(&mut sq) / n,
    })
}

pub fn metrics(pred: &MultivariateSeries, truth: &MultivariateSeries) -> Result<Metrics> {
    if (pred.vars(), pred.steps()) != (truth.vars(), truth.steps()) {
        return dim_err("prediction and truth shapes differ");
    }
    metrics_slices(pred.as_slice(), truth.as_slice())
}
