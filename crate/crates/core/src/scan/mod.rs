//! Forward scans over a multivariate series.
//!
//! [`vi_forward`] pools a global field ψ once per step and then updates every variable
//! independently. [`ordered_forward`] is the conventional baseline whose vertical state is
//! threaded through the variables in index order.

mod bench;
mod engine;
mod modes;
mod ordered;
mod selective;

pub use bench::{depth_benchmark, Engine, TimingRow};
pub use engine::{vi_forward, ScanSystem};
pub use modes::{effective_system, mode_radii, shrink_global_coupling, ModeRadii};
pub use ordered::{ordered_forward, ordered_forward_recording, OrderedSystem};
pub use selective::{
    make_selective, vi_forward_selective, DeltaMap, SelectiveParams, SelectiveStreams,
};

use crate::error::{dim_err, Result};
use crate::series::{check_permutation, MultivariateSeries};

/// Per-variable horizontal and vertical states, row-major `C × d`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanState {
    vars: usize,
    d_h: usize,
    d_v: usize,
    h_h: Vec<f64>,
    h_v: Vec<f64>,
}

impl ScanState {
    pub fn zeros(vars: usize, d_h: usize, d_v: usize) -> Self {
        Self { vars, d_h, d_v, h_h: vec![0.0; vars * d_h], h_v: vec![0.0; vars * d_v] }
    }

    pub fn new(vars: usize, d_h: usize, d_v: usize, h_h: Vec<f64>, h_v: Vec<f64>) -> Result<Self> {
        if h_h.len() != vars * d_h || h_v.len() != vars * d_v {
            return dim_err(format!(
                "state buffers of {} and {} values do not fit {vars} variables × ({d_h}, {d_v})",
                h_h.len(),
                h_v.len()
            ));
        }
        Ok(Self { vars, d_h, d_v, h_h, h_v })
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.d_h, self.d_v)
    }

    pub fn h_h(&self) -> &[f64] {
        &self.h_h
    }

    pub fn h_v(&self) -> &[f64] {
        &self.h_v
    }

    pub fn h_h_row(&self, c: usize) -> &[f64] {
        &self.h_h[c * self.d_h..(c + 1) * self.d_h]
    }

    pub fn h_v_row(&self, c: usize) -> &[f64] {
        &self.h_v[c * self.d_v..(c + 1) * self.d_v]
    }

    pub fn is_finite(&self) -> bool {
        self.h_h.iter().chain(&self.h_v).all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.h_h.iter().chain(&self.h_v).fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Row `c` of the result is row `perm[c]` of `self`.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.vars)?;
        let pick = |buf: &[f64], d: usize| -> Vec<f64> {
            perm.iter().flat_map(|&p| buf[p * d..(p + 1) * d].iter().copied()).collect()
        };
        Ok(Self { h_h: pick(&self.h_h, self.d_h), h_v: pick(&self.h_v, self.d_v), ..self.clone() })
    }

    pub fn scaled_add(&self, a: f64, other: &Self, b: f64) -> Self {
        let mix = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| a * p + b * q).collect();
        Self { h_h: mix(&self.h_h, &other.h_h), h_v: mix(&self.h_v, &other.h_v), ..self.clone() }
    }

    pub(crate) fn buffers_mut(&mut self) -> (&mut [f64], &mut [f64]) {
        (&mut self.h_h, &mut self.h_v)
    }
}

/// What each variable contributes to the pooled field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FeatureSource {
    /// `z = (h_h, x)`.
    #[default]
    HorizontalAndInput,
    /// `z = (h_h, h_v, x)`.
    AllStatesAndInput,
    /// `z = x`.
    Input,
}

impl FeatureSource {
    pub fn width(self, d_h: usize, d_v: usize) -> usize {
        match self {
            FeatureSource::HorizontalAndInput => d_h + 1,
            FeatureSource::AllStatesAndInput => d_h + d_v + 1,
            FeatureSource::Input => 1,
        }
    }

    pub(crate) fn write(self, h_h: &[f64], h_v: &[f64], x: f64, out: &mut [f64]) {
        match self {
            FeatureSource::HorizontalAndInput => {
                out[..h_h.len()].copy_from_slice(h_h);
                out[h_h.len()] = x;
            }
            FeatureSource::AllStatesAndInput => {
                out[..h_h.len()].copy_from_slice(h_h);
                out[h_h.len()..h_h.len() + h_v.len()].copy_from_slice(h_v);
                out[h_h.len() + h_v.len()] = x;
            }
            FeatureSource::Input => out[0] = x,
        }
    }
}

/// Which horizontal state feeds the vertical update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VhLag {
    /// `h_v[t]` sees `h_h[t]`.
    #[default]
    Current,
    /// `h_v[t]` sees `h_h[t−1]`, the plain block recurrence `h[t] = Ā h[t−1] + B̄ u[t]`.
    Previous,
}

/// Order in which variables are visited within one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Schedule {
    Ascending,
    Descending,
    #[default]
    Parallel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ScanOptions {
    pub vh_lag: VhLag,
    pub features: FeatureSource,
    pub schedule: Schedule,
    /// Keep the state after every step in [`ScanOutput::states`].
    pub record_states: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanOutput {
    pub y: MultivariateSeries,
    pub final_state: ScanState,
    /// ψ used at each step; empty for the ordered engine.
    pub psi_trace: Vec<Vec<f64>>,
    pub states: Option<Vec<ScanState>>,
}
