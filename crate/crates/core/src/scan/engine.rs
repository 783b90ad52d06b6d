use rayon::prelude::*;

use super::{FeatureSource, Schedule, ScanOptions, ScanOutput, ScanState, VhLag};
use crate::aggregation::{pool_flat, AggregatorSpec};
use crate::error::{dim_err, domain_err, size_err, Error, Result};
use crate::numerics::Matrix;
use crate::series::MultivariateSeries;
use crate::ssm::{discretize_zoh, ContinuousSystem, DiscreteSystem};

/// A discretized system together with its readout and pooling projection.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanSystem {
    pub discrete: DiscreteSystem,
    pub c_h: Vec<f64>,
    pub c_v: Vec<f64>,
    pub w_v: Matrix,
}

impl ScanSystem {
    pub fn new(sys: &ContinuousSystem, delta: f64) -> Result<Self> {
        Ok(Self {
            discrete: discretize_zoh(sys, delta)?,
            c_h: sys.c_h.as_slice().to_vec(),
            c_v: sys.c_v.as_slice().to_vec(),
            w_v: sys.w_v.clone(),
        })
    }

    pub fn from_discrete(discrete: DiscreteSystem, c_h: Vec<f64>, c_v: Vec<f64>, w_v: Matrix) -> Result<Self> {
        if c_h.len() != discrete.d_h || c_v.len() != discrete.d_v || w_v.rows() != discrete.d_psi {
            return dim_err("readout or W_v does not match the discrete system");
        }
        Ok(Self { discrete, c_h, c_v, w_v })
    }

    pub(super) fn blocks(&self) -> StepBlocks {
        let d = &self.discrete;
        let mut readout = self.c_h.clone();
        readout.extend_from_slice(&self.c_v);
        StepBlocks {
            a_h: d.a_h_bar(),
            a_v: d.a_v_bar(),
            a_vh: d.a_vh_bar(),
            b_psi: d.b_psi(),
            bx: d.b_x(),
            bx_stride: 0,
            readout,
            readout_stride: 0,
        }
    }
}

/// Everything the per-variable update needs at one step.
///
/// `bx` and `readout` are either shared (stride 0) or stored per variable with stride `n`.
#[derive(Debug, Clone)]
pub(super) struct StepBlocks {
    pub a_h: Matrix,
    pub a_v: Matrix,
    pub a_vh: Matrix,
    pub b_psi: Matrix,
    pub bx: Vec<f64>,
    pub bx_stride: usize,
    pub readout: Vec<f64>,
    pub readout_stride: usize,
}

impl StepBlocks {
    fn bx(&self, c: usize, n: usize) -> &[f64] {
        &self.bx[c * self.bx_stride..c * self.bx_stride + n]
    }

    fn readout(&self, c: usize, n: usize) -> &[f64] {
        &self.readout[c * self.readout_stride..c * self.readout_stride + n]
    }
}

/// Supplies [`StepBlocks`] for each step.
pub(super) trait StepSource {
    fn prepare(&mut self, t: usize, x: &MultivariateSeries) -> Result<()>;
    fn blocks(&self) -> &StepBlocks;
}

struct Fixed(StepBlocks);

impl StepSource for Fixed {
    fn prepare(&mut self, _: usize, _: &MultivariateSeries) -> Result<()> {
        Ok(())
    }

    fn blocks(&self) -> &StepBlocks {
        &self.0
    }
}

/// Forward pass of the variable-invariant scan.
pub fn vi_forward(
    sys: &ScanSystem,
    agg: &AggregatorSpec,
    x: &MultivariateSeries,
    init: &ScanState,
    opts: &ScanOptions,
) -> Result<ScanOutput> {
    let d = &sys.discrete;
    run_scan(Fixed(sys.blocks()), (d.d_h, d.d_v, d.d_psi), &sys.w_v, agg, x, init, opts)
}

pub(super) fn check_inputs(
    x: &MultivariateSeries,
    init: &ScanState,
    d_h: usize,
    d_v: usize,
) -> Result<()> {
    if x.vars() == 0 || x.steps() == 0 {
        return size_err("scan needs at least one variable and one step");
    }
    if d_h == 0 || d_v == 0 {
        return dim_err("scan needs nonempty horizontal and vertical states");
    }
    if !x.is_finite() {
        return domain_err("input contains non-finite values");
    }
    if init.vars() != x.vars() || init.dims() != (d_h, d_v) {
        return dim_err(format!(
            "initial state is {} × {:?}, expected {} × {:?}",
            init.vars(),
            init.dims(),
            x.vars(),
            (d_h, d_v)
        ));
    }
    if !init.is_finite() {
        return domain_err("initial state contains non-finite values");
    }
    Ok(())
}

/// Variables per rayon task; smaller splits cost more than they save.
const PAR_MIN_VARS: usize = 32;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

struct VarCtx<'a> {
    blocks: &'a StepBlocks,
    g: &'a [f64],
    w_v: &'a Matrix,
    lag: VhLag,
    features: FeatureSource,
    x_col: &'a [f64],
    d_h: usize,
    n: usize,
}

impl VarCtx<'_> {
    /// Advances one variable in place and returns its output.
    fn update(&self, c: usize, hh: &mut [f64], hv: &mut [f64], scratch: &mut [f64], z: &mut [f64], proj: &mut [f64]) -> f64 {
        let b = self.blocks;
        let x = self.x_col[c];
        let bx = b.bx(c, self.n);
        let (new_h, new_v) = scratch.split_at_mut(self.d_h);
        b.a_h.matvec_into(hh, new_h);
        for i in 0..self.d_h {
            new_h[i] += self.g[i] + bx[i] * x;
        }
        b.a_v.matvec_into(hv, new_v);
        let source: &[f64] = match self.lag {
            VhLag::Current => new_h,
            VhLag::Previous => hh,
        };
        b.a_vh.matvec_add(source, new_v);
        for (i, v) in new_v.iter_mut().enumerate() {
            *v += self.g[self.d_h + i] + bx[self.d_h + i] * x;
        }
        hh.copy_from_slice(new_h);
        hv.copy_from_slice(new_v);
        let r = b.readout(c, self.n);
        let y = dot(&r[..self.d_h], hh) + dot(&r[self.d_h..], hv);
        self.features.write(hh, hv, x, z);
        self.w_v.matvec_into(z, proj);
        y
    }
}

pub(super) fn run_scan(
    mut source: impl StepSource,
    (d_h, d_v, d_psi): (usize, usize, usize),
    w_v: &Matrix,
    agg: &AggregatorSpec,
    x: &MultivariateSeries,
    init: &ScanState,
    opts: &ScanOptions,
) -> Result<ScanOutput> {
    check_inputs(x, init, d_h, d_v)?;
    let d_z = opts.features.width(d_h, d_v);
    if w_v.shape() != (d_psi, d_z) {
        return dim_err(format!("W_v is {:?}, expected ({d_psi}, {d_z}) for {:?}", w_v.shape(), opts.features));
    }
    if d_psi == 0 {
        return dim_err("pooled field needs at least one component");
    }
    agg.validate()?;
    let (vars, steps) = (x.vars(), x.steps());
    let n = d_h + d_v;

    let mut state = init.clone();
    let mut scratch = vec![0.0; vars * n];
    let mut z = vec![0.0; vars * d_z];
    let mut proj = vec![0.0; vars * d_psi];
    for c in 0..vars {
        let zc = &mut z[c * d_z..(c + 1) * d_z];
        opts.features.write(state.h_h_row(c), state.h_v_row(c), 0.0, zc);
        w_v.matvec_into(zc, &mut proj[c * d_psi..(c + 1) * d_psi]);
    }

    let mut y = vec![0.0; vars * steps];
    let mut y_col = vec![0.0; vars];
    let mut psi_trace = Vec::with_capacity(steps);
    let mut states = opts.record_states.then(|| Vec::with_capacity(steps));
    let mut g = vec![0.0; n];

    for t in 0..steps {
        let psi = pool_flat(agg, &proj, d_psi)?;
        source.prepare(t, x)?;
        let blocks = source.blocks();
        blocks.b_psi.matvec_into(&psi, &mut g);
        let x_col = x.column(t);
        let ctx = VarCtx { blocks, g: &g, w_v, lag: opts.vh_lag, features: opts.features, x_col: &x_col, d_h, n };

        let (hh_buf, hv_buf) = state.buffers_mut();
        macro_rules! lanes {
            ($chunks:ident) => {
                hh_buf
                    .$chunks(d_h)
                    .zip(hv_buf.$chunks(d_v))
                    .zip(scratch.$chunks(n))
                    .zip(z.$chunks(d_z))
                    .zip(proj.$chunks(d_psi))
                    .zip(y_col.$chunks(1))
                    .enumerate()
            };
        }
        let work = |(c, (((((hh, hv), sc), zc), pc), yc)): (usize, (((((&mut [f64], &mut [f64]), &mut [f64]), &mut [f64]), &mut [f64]), &mut [f64]))| {
            yc[0] = ctx.update(c, hh, hv, sc, zc, pc);
        };
        match opts.schedule {
            Schedule::Ascending => lanes!(chunks_mut).for_each(work),
            Schedule::Descending => lanes!(chunks_mut).rev().for_each(work),
            Schedule::Parallel => lanes!(par_chunks_mut).with_min_len(PAR_MIN_VARS).for_each(work),
        }

        for (c, v) in y_col.iter().enumerate() {
            y[c * steps + t] = *v;
        }
        psi_trace.push(psi);
        if let Some(s) = states.as_mut() {
            s.push(state.clone());
        }
    }

    finish(y, vars, steps, state, psi_trace, states)
}

pub(super) fn finish(
    y: Vec<f64>,
    vars: usize,
    steps: usize,
    final_state: ScanState,
    psi_trace: Vec<Vec<f64>>,
    states: Option<Vec<ScanState>>,
) -> Result<ScanOutput> {
    if !final_state.is_finite() || y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical {
            message: "scan diverged; check stability of the closed loop".into(),
            residual: f64::INFINITY,
        });
    }
    Ok(ScanOutput { y: MultivariateSeries::new(vars, steps, y)?, final_state, psi_trace, states })
}
