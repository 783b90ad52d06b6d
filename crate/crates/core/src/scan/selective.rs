use super::engine::{run_scan, StepBlocks, StepSource};
use super::{ScanOptions, ScanOutput, ScanState};
use crate::aggregation::AggregatorSpec;
use crate::error::{dim_err, domain_err, Result};
use crate::numerics::{canonical_sum, Matrix, Rng};
use crate::series::MultivariateSeries;
use crate::ssm::ContinuousSystem;

/// How the per-step Δ is read from the input slice `x[t, :]`.
#[derive(Debug, Clone, PartialEq)]
pub enum DeltaMap {
    /// `weight · mean_c x[t, c] + bias`; invariant to variable order.
    MeanAffine { weight: f64, bias: f64 },
    /// `Σ_c weights[c] x[t, c] + bias`; tied to a fixed variable count and order.
    Dense { weights: Vec<f64>, bias: f64 },
}

/// Affine maps producing input-dependent `B[t,c]`, `C[t,c]` and `Δ[t]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectiveParams {
    pub b_weight: Vec<f64>,
    pub b_bias: Vec<f64>,
    pub c_weight: Vec<f64>,
    pub c_bias: Vec<f64>,
    pub delta_map: DeltaMap,
    pub delta_floor: f64,
}

fn softplus(z: f64) -> f64 {
    if z > 30.0 {
        z
    } else {
        z.exp().ln_1p()
    }
}

impl SelectiveParams {
    /// Zero weights: the streams reproduce `sys`'s `B`, `C` and step `delta > floor`.
    pub fn constant(sys: &ContinuousSystem, delta: f64, delta_floor: f64) -> Result<Self> {
        if !(delta > delta_floor) || !(delta_floor > 0.0) {
            return domain_err(format!("need delta > floor > 0, got {delta}, {delta_floor}"));
        }
        let n = sys.dims().state();
        let b_bias: Vec<f64> = sys.b_h.as_slice().iter().chain(sys.b_v.as_slice()).copied().collect();
        // Inverse softplus.
        let excess = delta - delta_floor;
        let bias = if excess > 30.0 { excess } else { excess.exp_m1().ln() };
        Ok(Self {
            b_weight: vec![0.0; n],
            b_bias,
            c_weight: vec![0.0; n],
            c_bias: sys.readout(),
            delta_map: DeltaMap::MeanAffine { weight: 0.0, bias },
            delta_floor,
        })
    }

    /// [`Self::constant`] plus Gaussian weights of standard deviation `scale`.
    pub fn random(sys: &ContinuousSystem, delta: f64, delta_floor: f64, scale: f64, rng: &mut Rng) -> Result<Self> {
        let mut p = Self::constant(sys, delta, delta_floor)?;
        p.b_weight.iter_mut().chain(p.c_weight.iter_mut()).for_each(|w| *w = scale * rng.normal());
        if let DeltaMap::MeanAffine { weight, .. } = &mut p.delta_map {
            *weight = scale * rng.normal();
        }
        Ok(p)
    }

    pub fn state_dim(&self) -> usize {
        self.b_weight.len()
    }

    fn validate(&self) -> Result<()> {
        let n = self.b_weight.len();
        if self.b_bias.len() != n || self.c_weight.len() != n || self.c_bias.len() != n {
            return dim_err("selective maps have inconsistent widths");
        }
        if !(self.delta_floor > 0.0) {
            return domain_err(format!("delta floor must be positive, got {}", self.delta_floor));
        }
        Ok(())
    }
}

/// Per-step parameter streams, `b` and `c` stored `T × C × n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectiveStreams {
    pub vars: usize,
    pub steps: usize,
    pub state_dim: usize,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub delta: Vec<f64>,
}

impl SelectiveStreams {
    pub fn b_at(&self, t: usize, c: usize) -> &[f64] {
        let i = (t * self.vars + c) * self.state_dim;
        &self.b[i..i + self.state_dim]
    }

    pub fn c_at(&self, t: usize, c: usize) -> &[f64] {
        let i = (t * self.vars + c) * self.state_dim;
        &self.c[i..i + self.state_dim]
    }
}

pub fn make_selective(params: &SelectiveParams, x: &MultivariateSeries) -> Result<SelectiveStreams> {
    params.validate()?;
    if !x.is_finite() {
        return domain_err("input contains non-finite values");
    }
    let (vars, steps, n) = (x.vars(), x.steps(), params.state_dim());
    if let DeltaMap::Dense { weights, .. } = &params.delta_map {
        if weights.len() != vars {
            return dim_err(format!("dense Δ map has {} weights for {vars} variables", weights.len()));
        }
    }
    let mut b = Vec::with_capacity(steps * vars * n);
    let mut c = Vec::with_capacity(steps * vars * n);
    let mut delta = Vec::with_capacity(steps);
    for t in 0..steps {
        let mut col = x.column(t);
        for &xv in &col {
            b.extend(params.b_weight.iter().zip(&params.b_bias).map(|(w, b0)| w * xv + b0));
            c.extend(params.c_weight.iter().zip(&params.c_bias).map(|(w, c0)| w * xv + c0));
        }
        let z = match &params.delta_map {
            DeltaMap::MeanAffine { weight, bias } => weight * (canonical_sum(&mut col) / vars as f64) + bias,
            DeltaMap::Dense { weights, bias } => weights.iter().zip(&col).map(|(w, v)| w * v).sum::<f64>() + bias,
        };
        let d = params.delta_floor + softplus(z);
        if !d.is_finite() {
            return domain_err(format!("step size at t = {t} is not finite"));
        }
        delta.push(d);
    }
    Ok(SelectiveStreams { vars, steps, state_dim: n, b, c, delta })
}

struct Streamed<'a> {
    a_h: Vec<f64>,
    a_v: Vec<f64>,
    sys: &'a ContinuousSystem,
    streams: &'a SelectiveStreams,
    blocks: StepBlocks,
}

/// `(e^{Δa} − 1) / a`, the diagonal ZOH input gain; `Δ` at `a = 0`.
fn zoh_gain(a: f64, delta: f64) -> f64 {
    if a == 0.0 {
        delta
    } else {
        (delta * a).exp_m1() / a
    }
}

impl StepSource for Streamed<'_> {
    fn prepare(&mut self, t: usize, _: &MultivariateSeries) -> Result<()> {
        let delta = self.streams.delta[t];
        let d_h = self.a_h.len();
        let gains: Vec<f64> = self.a_h.iter().chain(&self.a_v).map(|&a| zoh_gain(a, delta)).collect();
        let bl = &mut self.blocks;
        bl.a_h = Matrix::diag(&self.a_h.iter().map(|a| (a * delta).exp()).collect::<Vec<_>>());
        bl.a_v = Matrix::diag(&self.a_v.iter().map(|a| (a * delta).exp()).collect::<Vec<_>>());
        bl.a_vh = self.sys.a_vh.scale(delta);
        let d_psi = self.sys.a_hpsi.cols();
        bl.b_psi = Matrix::from_fn(gains.len(), d_psi, |i, j| {
            let coupling = if i < d_h { self.sys.a_hpsi[(i, j)] } else { self.sys.a_vpsi[(i - d_h, j)] };
            gains[i] * coupling
        });
        let n = gains.len();
        bl.bx.clear();
        bl.readout.clear();
        for c in 0..self.streams.vars {
            bl.bx.extend(self.streams.b_at(t, c).iter().zip(&gains).map(|(b, g)| b * g));
            bl.readout.extend_from_slice(self.streams.c_at(t, c));
        }
        bl.bx_stride = n;
        bl.readout_stride = n;
        Ok(())
    }

    fn blocks(&self) -> &StepBlocks {
        &self.blocks
    }
}

/// Variable-invariant scan with input-dependent `B`, `C`, `Δ`.
///
/// The diagonal blocks are re-discretized exactly each step; the cross block uses the
/// first-order term `Δ[t] A_vh`. Requires diagonal `A_h` and `A_v`.
pub fn vi_forward_selective(
    sys: &ContinuousSystem,
    params: &SelectiveParams,
    agg: &AggregatorSpec,
    x: &MultivariateSeries,
    init: &ScanState,
    opts: &ScanOptions,
) -> Result<ScanOutput> {
    sys.validate()?;
    if !sys.a_h.is_diagonal() || !sys.a_v.is_diagonal() {
        return domain_err("selective scan requires diagonal A_h and A_v");
    }
    let dims = sys.dims();
    if params.state_dim() != dims.state() {
        return dim_err(format!("selective maps have width {}, state has {}", params.state_dim(), dims.state()));
    }
    let streams = make_selective(params, x)?;
    let source = Streamed {
        a_h: sys.a_h.diagonal(),
        a_v: sys.a_v.diagonal(),
        sys,
        streams: &streams,
        blocks: StepBlocks {
            a_h: Matrix::zeros(0, 0),
            a_v: Matrix::zeros(0, 0),
            a_vh: Matrix::zeros(0, 0),
            b_psi: Matrix::zeros(0, 0),
            bx: Vec::new(),
            bx_stride: 0,
            readout: Vec::new(),
            readout_stride: 0,
        },
    };
    run_scan(source, (dims.d_h, dims.d_v, dims.d_psi), &sys.w_v, agg, x, init, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ssm::SystemDims;

    fn sys(seed: u64) -> ContinuousSystem {
        let mut s = ContinuousSystem::random(SystemDims { d_h: 3, d_v: 2, d_psi: 2, d_z: 4 }, &mut Rng::new(seed));
        s.scale_global_coupling(0.2);
        s
    }

    #[test]
    fn zero_weights_give_constant_streams() {
        let s = sys(1);
        let p = SelectiveParams::constant(&s, 0.3, 0.01).unwrap();
        let mut rng = Rng::new(2);
        let x = MultivariateSeries::from_fn(4, 10, |_, _| rng.normal());
        let st = make_selective(&p, &x).unwrap();
        for d in &st.delta {
            assert!((d - 0.3).abs() < 1e-12);
        }
        assert_eq!(st.b_at(7, 3), st.b_at(0, 0));
    }

    #[test]
    fn delta_respects_floor_and_order() {
        let s = sys(3);
        let mut rng = Rng::new(4);
        let mut p = SelectiveParams::random(&s, 0.1, 0.05, 5.0, &mut rng).unwrap();
        p.delta_map = DeltaMap::MeanAffine { weight: -40.0, bias: -10.0 };
        let x = MultivariateSeries::from_fn(3, 50, |_, _| rng.normal());
        let base = make_selective(&p, &x).unwrap();
        assert!(base.delta.iter().all(|&d| d >= 0.05));
        for perm in crate::coupling::all_permutations(3) {
            let other = make_selective(&p, &x.permute_vars(&perm).unwrap()).unwrap();
            assert_eq!(other.delta, base.delta);
        }
    }

    #[test]
    fn constant_streams_match_first_order_cross_block() {
        // With zero cross coupling the exact and streamed discretizations coincide.
        let mut s = sys(5);
        s.a_vh = Matrix::zeros(2, 3);
        let p = SelectiveParams::constant(&s, 0.25, 0.01).unwrap();
        let mut rng = Rng::new(6);
        let x = MultivariateSeries::from_fn(3, 30, |_, _| rng.normal());
        let init = ScanState::zeros(3, 3, 2);
        let agg = AggregatorSpec::mean();
        let a = vi_forward_selective(&s, &p, &agg, &x, &init, &ScanOptions::default()).unwrap();
        let sc = super::super::ScanSystem::new(&s, 0.25).unwrap();
        let b = super::super::vi_forward(&sc, &agg, &x, &init, &ScanOptions::default()).unwrap();
        assert!(a.y.max_abs_diff(&b.y) < 1e-10);
    }

    #[test]
    fn selective_is_equivariant() {
        let s = sys(7);
        let mut rng = Rng::new(8);
        let p = SelectiveParams::random(&s, 0.2, 0.01, 0.3, &mut rng).unwrap();
        let x = MultivariateSeries::from_fn(5, 20, |_, _| rng.normal());
        let init = ScanState::zeros(5, 3, 2);
        let agg = AggregatorSpec::mean();
        let base = vi_forward_selective(&s, &p, &agg, &x, &init, &ScanOptions::default()).unwrap();
        let perm = [2, 4, 0, 1, 3];
        let out = vi_forward_selective(&s, &p, &agg, &x.permute_vars(&perm).unwrap(), &init, &ScanOptions::default()).unwrap();
        assert_eq!(out.y, base.y.permute_vars(&perm).unwrap());
    }

    #[test]
    fn rejects_dense_state_matrix() {
        let mut s = sys(9);
        s.a_h = Matrix::from_fn(3, 3, |i, j| if i == j { -1.0 } else { 0.1 });
        let p = SelectiveParams::constant(&s, 0.2, 0.01).unwrap();
        let x = MultivariateSeries::zeros(2, 3);
        assert!(vi_forward_selective(&s, &p, &AggregatorSpec::mean(), &x, &ScanState::zeros(2, 3, 2), &ScanOptions::default())
            .is_err());
    }
}
