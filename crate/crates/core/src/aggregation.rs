//! Permutation-invariant set pooling for the global field ψ.
//!
//! Every reduction over the set goes through [`canonical_sum`], so pooled outputs are
//! bit-identical for every ordering of the items, not merely equal up to rounding.

use serde::{Deserialize, Serialize};

use crate::error::{dim_err, domain_err, Result};
use crate::numerics::{canonical_sum, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AggregatorKind {
    Mean,
    Sum,
    Attention,
}

impl AggregatorKind {
    pub fn name(self) -> &'static str {
        match self {
            AggregatorKind::Mean => "mean",
            AggregatorKind::Sum => "sum",
            AggregatorKind::Attention => "attention",
        }
    }

    /// Work, parallel span and peak memory of one pooling call over `c` items of width `d`,
    /// counted in scalar operations / scalars.
    pub fn cost(self, c: usize, d: usize) -> AggregatorCost {
        let span = usize::BITS as usize - c.max(1).leading_zeros() as usize;
        match self {
            AggregatorKind::Mean | AggregatorKind::Sum => {
                AggregatorCost { work: c * d, span, peak_memory: d }
            }
            AggregatorKind::Attention => {
                AggregatorCost { work: c * d * d + 2 * c * d, span, peak_memory: c * d }
            }
        }
    }
}

impl std::str::FromStr for AggregatorKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mean" => Ok(AggregatorKind::Mean),
            "sum" => Ok(AggregatorKind::Sum),
            "attention" | "attn" => Ok(AggregatorKind::Attention),
            other => domain_err(format!("unknown aggregator {other:?} (mean, sum, attention)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AggregatorCost {
    pub work: usize,
    /// Levels of a balanced tree reduction, `⌊log₂ C⌋ + 1`.
    pub span: usize,
    pub peak_memory: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregatorSpec {
    pub kind: AggregatorKind,
    /// Attention seed query, `d_psi` entries.
    pub query: Vec<f64>,
    /// Attention key map, `d_psi × d_psi`.
    pub key_proj: Matrix,
    pub temperature: f64,
}

impl AggregatorSpec {
    pub fn mean() -> Self {
        Self { kind: AggregatorKind::Mean, query: Vec::new(), key_proj: Matrix::zeros(0, 0), temperature: 1.0 }
    }

    pub fn sum() -> Self {
        Self { kind: AggregatorKind::Sum, ..Self::mean() }
    }

    pub fn attention(query: Vec<f64>, key_proj: Matrix, temperature: f64) -> Result<Self> {
        let spec = Self { kind: AggregatorKind::Attention, query, key_proj, temperature };
        spec.validate()?;
        Ok(spec)
    }

    /// Attention with identity keys, a constant query `1/√d` and unit temperature.
    pub fn default_attention(d_psi: usize) -> Self {
        let q = vec![1.0 / (d_psi.max(1) as f64).sqrt(); d_psi];
        Self { kind: AggregatorKind::Attention, query: q, key_proj: Matrix::identity(d_psi), temperature: 1.0 }
    }

    /// Builds the default spec of a kind for width `d_psi`.
    pub fn of_kind(kind: AggregatorKind, d_psi: usize) -> Self {
        match kind {
            AggregatorKind::Mean => Self::mean(),
            AggregatorKind::Sum => Self::sum(),
            AggregatorKind::Attention => Self::default_attention(d_psi),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind != AggregatorKind::Attention {
            return Ok(());
        }
        if !(self.temperature > 0.0) || !self.temperature.is_finite() {
            return domain_err(format!("attention temperature must be positive, got {}", self.temperature));
        }
        let d = self.query.len();
        if self.key_proj.shape() != (d, d) {
            return dim_err(format!("key projection is {:?}, query has {d} entries", self.key_proj.shape()));
        }
        Ok(())
    }

    fn check_width(&self, width: usize) -> Result<()> {
        if self.kind == AggregatorKind::Attention && self.query.len() != width {
            return dim_err(format!("attention query has {} entries, items have {width}", self.query.len()));
        }
        Ok(())
    }

    /// Softmax weights over the items (attention only; uniform for mean, ones for sum).
    pub fn weights(&self, items: &[Vec<f64>]) -> Result<Vec<f64>> {
        let width = check_items(items)?;
        self.validate()?;
        self.check_width(width)?;
        Ok(match self.kind {
            AggregatorKind::Mean => vec![1.0 / items.len() as f64; items.len()],
            AggregatorKind::Sum => vec![1.0; items.len()],
            AggregatorKind::Attention => self.softmax(items.iter().map(Vec::as_slice), items.len()),
        })
    }

    fn softmax<'a>(&self, items: impl Iterator<Item = &'a [f64]>, n: usize) -> Vec<f64> {
        // ⟨q, K v⟩ = ⟨Kᵀ q, v⟩; each score depends only on its own item.
        let kq = self.key_proj.transpose().matvec(&self.query).expect("validated shape");
        let scores: Vec<f64> = items
            .map(|v| kq.iter().zip(v).map(|(a, b)| a * b).sum::<f64>() / self.temperature)
            .collect();
        let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
        let mut scratch = e.clone();
        let z = canonical_sum(&mut scratch);
        debug_assert_eq!(e.len(), n);
        e.into_iter().map(|v| v / z).collect()
    }
}

impl Default for AggregatorSpec {
    fn default() -> Self {
        Self::mean()
    }
}

fn check_items(items: &[Vec<f64>]) -> Result<usize> {
    let Some(first) = items.first() else {
        return domain_err("cannot pool an empty set");
    };
    let width = first.len();
    if let Some(bad) = items.iter().find(|v| v.len() != width) {
        return dim_err(format!("items have widths {width} and {}", bad.len()));
    }
    Ok(width)
}

/// Pools a multiset of equal-width vectors.
pub fn pool(spec: &AggregatorSpec, items: &[Vec<f64>]) -> Result<Vec<f64>> {
    let width = check_items(items)?;
    let flat: Vec<f64> = items.iter().flatten().copied().collect();
    pool_flat(spec, &flat, width)
}

/// [`pool`] over `items.len() / width` row-major items.
pub fn pool_flat(spec: &AggregatorSpec, items: &[f64], width: usize) -> Result<Vec<f64>> {
    if items.is_empty() {
        return domain_err("cannot pool an empty set");
    }
    if width == 0 || items.len() % width != 0 {
        return dim_err(format!("{} values do not split into items of width {width}", items.len()));
    }
    spec.validate()?;
    spec.check_width(width)?;
    let n = items.len() / width;
    let weights = match spec.kind {
        AggregatorKind::Attention => Some(spec.softmax(items.chunks_exact(width), n)),
        _ => None,
    };
    let mut column = vec![0.0; n];
    Ok((0..width)
        .map(|j| {
            for (c, slot) in column.iter_mut().enumerate() {
                let v = items[c * width + j];
                *slot = match &weights {
                    Some(w) => w[c] * v,
                    None => v,
                };
            }
            let s = canonical_sum(&mut column);
            match spec.kind {
                AggregatorKind::Mean => s / n as f64,
                _ => s,
            }
        })
        .collect())
}

/// ψ = φ({W_v z_c}).
pub fn compute_psi(w_v: &Matrix, z_slice: &[Vec<f64>], spec: &AggregatorSpec) -> Result<Vec<f64>> {
    if z_slice.is_empty() {
        return domain_err("cannot pool an empty set");
    }
    let mut projected = Vec::with_capacity(z_slice.len() * w_v.rows());
    for z in z_slice {
        if z.len() != w_v.cols() {
            return dim_err(format!("feature width {} does not match W_v with {} columns", z.len(), w_v.cols()));
        }
        projected.extend(w_v.matvec(z)?);
    }
    pool_flat(spec, &projected, w_v.rows())
}
