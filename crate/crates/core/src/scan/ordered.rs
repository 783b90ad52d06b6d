use super::engine::{check_inputs, finish};
use super::{ScanOutput, ScanState};
use crate::error::{dim_err, Result};
use crate::numerics::{mat_exp, Matrix};
use crate::series::MultivariateSeries;
use crate::ssm::ContinuousSystem;

/// Separately discretized horizontal and vertical recurrences of the ordered baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderedSystem {
    pub a_h: Matrix,
    pub b_h: Vec<f64>,
    pub a_v: Matrix,
    pub b_v: Vec<f64>,
    pub c_h: Vec<f64>,
    pub c_v: Vec<f64>,
}

fn zoh_pair(a: &Matrix, b: &Matrix, delta: f64) -> Result<(Matrix, Vec<f64>)> {
    let n = a.rows();
    let mut aug = Matrix::zeros(n + 1, n + 1);
    aug.set_block(0, 0, &a.scale(delta));
    aug.set_block(0, n, &b.scale(delta));
    let e = mat_exp(&aug)?;
    Ok((e.block(0, n, 0, n), e.block(0, n, n, n + 1).into_vec()))
}

impl OrderedSystem {
    /// ZOH of `(A_h, B_h)` and `(A_v, B_v)` at step `delta`; the ψ and cross blocks are unused.
    pub fn from_continuous(sys: &ContinuousSystem, delta: f64) -> Result<Self> {
        if !(delta > 0.0) {
            return crate::error::domain_err(format!("step size must be positive, got {delta}"));
        }
        sys.validate()?;
        let (a_h, b_h) = zoh_pair(&sys.a_h, &sys.b_h, delta)?;
        let (a_v, b_v) = zoh_pair(&sys.a_v, &sys.b_v, delta)?;
        Ok(Self { a_h, b_h, a_v, b_v, c_h: sys.c_h.as_slice().to_vec(), c_v: sys.c_v.as_slice().to_vec() })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.a_h.rows(), self.a_v.rows())
    }
}

/// Ordered 2D scan: `h_h` runs along time per variable; `h_v` runs along the variables
/// `0, 1, …, C−1` within each step, starting from zero, so the output depends on variable order.
pub fn ordered_forward(sys: &OrderedSystem, x: &MultivariateSeries, init: &ScanState) -> Result<ScanOutput> {
    ordered_forward_recording(sys, x, init, false)
}

/// [`ordered_forward`], optionally keeping the state after every step.
pub fn ordered_forward_recording(
    sys: &OrderedSystem,
    x: &MultivariateSeries,
    init: &ScanState,
    record_states: bool,
) -> Result<ScanOutput> {
    let (d_h, d_v) = sys.dims();
    if sys.b_h.len() != d_h || sys.b_v.len() != d_v || sys.c_h.len() != d_h || sys.c_v.len() != d_v {
        return dim_err("ordered system blocks are inconsistent");
    }
    check_inputs(x, init, d_h, d_v)?;
    let (vars, steps) = (x.vars(), x.steps());
    let mut state = init.clone();
    let mut y = vec![0.0; vars * steps];
    let mut tmp_h = vec![0.0; d_h];
    let mut chain = vec![0.0; d_v];
    let mut tmp_v = vec![0.0; d_v];
    let mut states = record_states.then(|| Vec::with_capacity(steps));
    for t in 0..steps {
        chain.iter_mut().for_each(|v| *v = 0.0);
        let (hh_buf, hv_buf) = state.buffers_mut();
        for c in 0..vars {
            let xv = x.get(c, t);
            let hh = &mut hh_buf[c * d_h..(c + 1) * d_h];
            sys.a_h.matvec_into(hh, &mut tmp_h);
            for i in 0..d_h {
                hh[i] = tmp_h[i] + sys.b_h[i] * xv;
            }
            sys.a_v.matvec_into(&chain, &mut tmp_v);
            for i in 0..d_v {
                chain[i] = tmp_v[i] + sys.b_v[i] * xv;
            }
            hv_buf[c * d_v..(c + 1) * d_v].copy_from_slice(&chain);
            let out: f64 = sys.c_h.iter().zip(hh.iter()).map(|(a, b)| a * b).sum::<f64>()
                + sys.c_v.iter().zip(&chain).map(|(a, b)| a * b).sum::<f64>();
            y[c * steps + t] = out;
        }
        if let Some(s) = states.as_mut() {
            s.push(state.clone());
        }
    }
    finish(y, vars, steps, state, Vec::new(), states)
}
