use crate::error::{dim_err, domain_err, Result};
use crate::numerics::Matrix;

/// A `C × T` block of real observations: one row per variable, one column per time step.
#[derive(Debug, Clone, PartialEq)]
pub struct MultivariateSeries {
    vars: usize,
    steps: usize,
    data: Vec<f64>,
}

impl MultivariateSeries {
    pub fn new(vars: usize, steps: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != vars * steps {
            return dim_err(format!(
                "series data has {} values, expected {vars}×{steps}",
                data.len()
            ));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return domain_err(format!(
                "non-finite observation at variable {}, step {}",
                i / steps.max(1),
                i % steps.max(1)
            ));
        }
        Ok(Self { vars, steps, data })
    }

    pub fn zeros(vars: usize, steps: usize) -> Self {
        Self { vars, steps, data: vec![0.0; vars * steps] }
    }

    /// Builds a series from one slice per variable.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let steps = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != steps) {
            return dim_err("ragged rows in series");
        }
        Self::new(rows.len(), steps, rows.concat())
    }

    pub fn from_fn(vars: usize, steps: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(vars * steps);
        for c in 0..vars {
            for t in 0..steps {
                data.push(f(c, t));
            }
        }
        Self { vars, steps, data }
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn get(&self, var: usize, step: usize) -> f64 {
        self.data[var * self.steps + step]
    }

    pub fn set(&mut self, var: usize, step: usize, value: f64) {
        self.data[var * self.steps + step] = value;
    }

    pub fn row(&self, var: usize) -> &[f64] {
        &self.data[var * self.steps..(var + 1) * self.steps]
    }

    pub fn row_mut(&mut self, var: usize) -> &mut [f64] {
        &mut self.data[var * self.steps..(var + 1) * self.steps]
    }

    pub fn rows_mut(&mut self) -> std::slice::ChunksMut<'_, f64> {
        self.data.chunks_mut(self.steps.max(1))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Values of every variable at one step.
    pub fn column(&self, step: usize) -> Vec<f64> {
        (0..self.vars).map(|c| self.get(c, step)).collect()
    }

    /// Row `c` of the result is row `perm[c]` of `self`, i.e. `x^π(t, c) = x(t, π(c))`.
    pub fn permute_vars(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.vars)?;
        let mut data = Vec::with_capacity(self.data.len());
        for &src in perm {
            data.extend_from_slice(self.row(src));
        }
        Ok(Self { vars: self.vars, steps: self.steps, data })
    }

    /// Columns `[start, end)`.
    pub fn slice_steps(&self, start: usize, end: usize) -> Self {
        assert!(start <= end && end <= self.steps, "step range out of bounds");
        let steps = end - start;
        let mut data = Vec::with_capacity(self.vars * steps);
        for c in 0..self.vars {
            data.extend_from_slice(&self.row(c)[start..end]);
        }
        Self { vars: self.vars, steps, data }
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix::new(self.vars, self.steps, self.data.clone()).expect("finite by construction")
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.vars, self.steps), (other.vars, other.steps));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { vars: self.vars, steps: self.steps, data: self.data.iter().map(|&v| f(v)).collect() }
    }

    pub fn scaled_add(&self, a: f64, other: &Self, b: f64) -> Self {
        assert_eq!((self.vars, self.steps), (other.vars, other.steps));
        let data = self.data.iter().zip(&other.data).map(|(x, y)| a * x + b * y).collect();
        Self { vars: self.vars, steps: self.steps, data }
    }
}

pub(crate) fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return dim_err(format!("permutation of length {} for {n} variables", perm.len()));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return domain_err(format!("{perm:?} is not a permutation of 0..{n}"));
        }
        seen[p] = true;
    }
    Ok(())
}
