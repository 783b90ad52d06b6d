//! Permutation-equivariant linear coupling across variables.
//!
//! A `C × C` matrix commutes with every permutation matrix exactly when it has the form
//! `αI + β11ᵀ`: one shared diagonal value and one shared off-diagonal value. Such a matrix
//! has two invariant subspaces, the zero-sum vectors (eigenvalue `α`) and the span of `1`
//! (eigenvalue `α + Cβ`).

use crate::error::{dim_err, domain_err, size_err, Error, Result};
use crate::numerics::{canonical_sum, Matrix};
use crate::series::MultivariateSeries;

/// Absolute tolerance for entry comparisons.
pub const ENTRY_TOL: f64 = 1e-10;

/// Largest order for which [`commutes_with_all_permutations`] enumerates `S_C`.
pub const MAX_ENUMERATED_ORDER: usize = 6;

/// `M = αI_C + β11ᵀ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonicalCoupling {
    pub alpha: f64,
    pub beta: f64,
    pub num_vars: usize,
}

impl CanonicalCoupling {
    pub fn new(alpha: f64, beta: f64, num_vars: usize) -> Result<Self> {
        if num_vars == 0 {
            return size_err("canonical coupling needs at least one variable");
        }
        if !alpha.is_finite() || !beta.is_finite() {
            return domain_err("coupling weights must be finite");
        }
        Ok(Self { alpha, beta, num_vars })
    }
}

/// Eigenvalues of the difference (zero-sum) and mean (span of `1`) modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSpectrum {
    pub lambda_diff: f64,
    pub lambda_mean: f64,
    pub stable: bool,
}

/// Why [`decompose_to_canonical`] refused a matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum Rejection {
    /// Diagonal entry `(i, i)` differs from `(0, 0)`.
    Diagonal { index: usize, expected: f64, found: f64 },
    /// Off-diagonal entry `(row, col)` differs from the first off-diagonal entry `(0, 1)`.
    OffDiagonal { row: usize, col: usize, expected: f64, found: f64 },
}

pub fn build_canonical(c: &CanonicalCoupling) -> Result<Matrix> {
    if c.num_vars == 0 {
        return size_err("canonical coupling needs at least one variable");
    }
    Ok(Matrix::from_fn(c.num_vars, c.num_vars, |i, j| {
        if i == j { c.alpha + c.beta } else { c.beta }
    }))
}

/// Reads `(α, β) = (d − o, o)` off a matrix with constant diagonal `d` and constant
/// off-diagonal `o`.
///
/// Entries are scanned row by row; the first one that breaks the pattern is reported.
pub fn decompose_to_canonical(m: &Matrix) -> Result<std::result::Result<CanonicalCoupling, Rejection>> {
    if !m.is_square() {
        return dim_err(format!("coupling matrix must be square, got {}×{}", m.rows(), m.cols()));
    }
    let n = m.rows();
    if n == 0 {
        return size_err("empty coupling matrix");
    }
    let d = m[(0, 0)];
    let o = if n > 1 { m[(0, 1)] } else { 0.0 };
    for i in 0..n {
        for j in 0..n {
            let found = m[(i, j)];
            if i == j {
                if (found - d).abs() > ENTRY_TOL {
                    return Ok(Err(Rejection::Diagonal { index: i, expected: d, found }));
                }
            } else if (found - o).abs() > ENTRY_TOL {
                return Ok(Err(Rejection::OffDiagonal { row: i, col: j, expected: o, found }));
            }
        }
    }
    Ok(Ok(CanonicalCoupling { alpha: d - o, beta: o, num_vars: n }))
}

/// Whether `M P_π = P_π M` for every `π ∈ S_C`.
///
/// Checks the full symmetric group and, independently, only the transpositions that
/// generate it. The two answers must agree; a disagreement is reported as a numerical error.
pub fn commutes_with_all_permutations(m: &Matrix) -> Result<bool> {
    if !m.is_square() {
        return dim_err(format!("matrix must be square, got {}×{}", m.rows(), m.cols()));
    }
    let n = m.rows();
    if n > MAX_ENUMERATED_ORDER {
        return size_err(format!(
            "enumerating S_{n} is capped at order {MAX_ENUMERATED_ORDER}"
        ));
    }
    let full = all_permutations(n).iter().all(|p| commutes_with(m, p));
    let by_swaps = transpositions(n).iter().all(|p| commutes_with(m, p));
    if full != by_swaps {
        return Err(Error::Numerical {
            message: format!(
                "full enumeration says {full}, transpositions say {by_swaps}"
            ),
            residual: f64::NAN,
        });
    }
    Ok(full)
}

pub fn mode_spectrum(c: &CanonicalCoupling) -> ModeSpectrum {
    let lambda_diff = c.alpha;
    let lambda_mean = c.alpha + c.num_vars as f64 * c.beta;
    ModeSpectrum { lambda_diff, lambda_mean, stable: lambda_diff.abs() < 1.0 && lambda_mean.abs() < 1.0 }
}

/// Mixes the variables of every step, `x'[:, t] = M x[:, t]`.
///
/// A canonical `M` is applied as `α x + β Σ_c x_c` with an order-insensitive sum, so the
/// result permutes exactly with the input; any other `M` uses the plain product.
pub fn apply_coupling(m: &Matrix, x: &MultivariateSeries) -> Result<MultivariateSeries> {
    if m.shape() != (x.vars(), x.vars()) {
        return dim_err(format!("coupling is {:?} for {} variables", m.shape(), x.vars()));
    }
    let canonical = decompose_to_canonical(m)?.ok();
    let mut out = MultivariateSeries::zeros(x.vars(), x.steps());
    for t in 0..x.steps() {
        let col = x.column(t);
        let mixed = match canonical {
            Some(c) => {
                let total = canonical_sum(&mut col.clone());
                col.iter().map(|v| c.alpha * v + c.beta * total).collect()
            }
            None => m.matvec(&col)?,
        };
        for (i, v) in mixed.into_iter().enumerate() {
            out.set(i, t, v);
        }
    }
    Ok(out)
}

/// `(M P_π)[i][j] = M[i][π(j)]`-style comparison without materialising `P_π`.
fn commutes_with(m: &Matrix, perm: &[usize]) -> bool {
    // P_π has a one at (i, π(i)): (P M)[i][j] = M[π(i)][j] and (M P)[i][j] = M[i][π⁻¹(j)].
    let n = perm.len();
    let mut inv = vec![0; n];
    for (i, &p) in perm.iter().enumerate() {
        inv[p] = i;
    }
    (0..n).all(|i| (0..n).all(|j| (m[(perm[i], j)] - m[(i, inv[j])]).abs() <= ENTRY_TOL))
}

fn transpositions(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let mut p: Vec<usize> = (0..n).collect();
            p.swap(i, j);
            out.push(p);
        }
    }
    out
}

/// All of `S_n` by Heap's algorithm.
pub fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    let mut p: Vec<usize> = (0..n).collect();
    let mut out = vec![p.clone()];
    let mut c = vec![0; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                p.swap(0, i);
            } else {
                p.swap(c[i], i);
            }
            out.push(p.clone());
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}
