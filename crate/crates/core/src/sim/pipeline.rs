use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{fit_ridge_readout, metrics_slices, watts_strogatz, Metrics, VarProcess};
use crate::aggregation::{pool_flat, AggregatorKind, AggregatorSpec};
use crate::error::{domain_err, size_err, Result};
use crate::numerics::{Matrix, Rng};
use crate::scan::{
    ordered_forward_recording, shrink_global_coupling, vi_forward, FeatureSource, OrderedSystem, ScanOptions,
    ScanOutput, ScanState, ScanSystem,
};
use crate::series::MultivariateSeries;
use crate::ssm::{ContinuousSystem, SystemDims};

/// Parameters shared by the controlled studies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub vars: usize,
    pub steps: usize,
    pub ws_k: usize,
    pub ws_p: f64,
    pub rho: f64,
    pub noise_sigma: f64,
    pub burn_in: usize,
    pub train_fraction: f64,
    pub lambda: f64,
    pub delta: f64,
    pub agg: AggregatorKind,
    pub d_h: usize,
    pub d_v: usize,
    pub d_psi: usize,
    /// Timed forward passes per engine (after one warm-up).
    pub timing_repeats: usize,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            vars: 64,
            steps: 1000,
            ws_k: 4,
            ws_p: 0.1,
            rho: 0.9,
            noise_sigma: 0.1,
            burn_in: 200,
            train_fraction: 0.8,
            lambda: 1e-3,
            delta: 0.5,
            agg: AggregatorKind::Mean,
            d_h: 8,
            d_v: 8,
            d_psi: 8,
            timing_repeats: 5,
        }
    }
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.ws_k % 2 != 0 || self.ws_k == 0 || self.ws_k >= self.vars {
            return domain_err(format!("graph degree {} must be even, positive and below {}", self.ws_k, self.vars));
        }
        if !(0.0..=1.0).contains(&self.ws_p) {
            return domain_err(format!("rewiring probability {} outside [0, 1]", self.ws_p));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return domain_err(format!("VAR radius {} must lie in (0, 1)", self.rho));
        }
        if !(self.noise_sigma >= 0.0) || !(self.lambda >= 0.0) || !(self.delta > 0.0) {
            return domain_err("noise level and ridge penalty must be nonnegative, step size positive");
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return domain_err(format!("train fraction {} must lie in (0, 1)", self.train_fraction));
        }
        if self.d_h == 0 || self.d_v == 0 || self.d_psi == 0 {
            return domain_err("state and field widths must be positive");
        }
        let train = self.train_rows(self.steps);
        if self.steps < 4 || train == 0 || train + 1 >= self.steps {
            return size_err(format!("{} steps leave no train/test split", self.steps));
        }
        Ok(())
    }

    pub fn dims(&self) -> SystemDims {
        SystemDims { d_h: self.d_h, d_v: self.d_v, d_psi: self.d_psi, d_z: self.d_h + 1 }
    }

    /// Number of one-step training pairs out of the `steps − 1` available.
    pub fn train_rows(&self, steps: usize) -> usize {
        (self.train_fraction * (steps - 1) as f64).floor() as usize
    }

    pub fn aggregator(&self) -> AggregatorSpec {
        AggregatorSpec::of_kind(self.agg, self.d_psi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Predictor {
    Vi,
    Ordered,
    Persistence,
}

impl Predictor {
    pub const ALL: [Predictor; 3] = [Predictor::Vi, Predictor::Ordered, Predictor::Persistence];

    pub fn name(self) -> &'static str {
        match self {
            Predictor::Vi => "vi",
            Predictor::Ordered => "ordered",
            Predictor::Persistence => "persistence",
        }
    }
}

/// Fixed scan systems for both engines, derived from one continuous template.
#[derive(Debug, Clone)]
pub struct PipelineSystems {
    pub vi: ScanSystem,
    pub ordered: OrderedSystem,
    pub agg: AggregatorSpec,
}

impl PipelineSystems {
    /// Template with its pooled feedback shrunk to a stable mean mode for `vars` variables.
    pub fn new(template: &ContinuousSystem, cfg: &StudyConfig, vars: usize) -> Result<Self> {
        let (stable, _) =
            shrink_global_coupling(template, cfg.delta, cfg.agg, vars, FeatureSource::HorizontalAndInput, 0.98)?;
        Ok(Self {
            vi: ScanSystem::new(&stable, cfg.delta)?,
            ordered: OrderedSystem::from_continuous(template, cfg.delta)?,
            agg: cfg.aggregator(),
        })
    }
}

/// Held-out forecasts of one predictor.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineResult {
    pub metrics: Metrics,
    /// `C × n_test` forecasts of `x[s]` for the test targets `s`.
    pub predictions: MultivariateSeries,
    pub truth: MultivariateSeries,
    /// Median seconds of one forward scan over the training split; zero for persistence.
    pub seconds: f64,
}

/// Graph, data and template generated for one study instance.
pub fn simulate_instance(cfg: &StudyConfig, vars: usize, rng: &mut Rng) -> Result<(MultivariateSeries, ContinuousSystem)> {
    let mut graph_rng = rng.split();
    let mut data_rng = rng.split();
    let mut sys_rng = rng.split();
    let g = watts_strogatz(vars, cfg.ws_k, cfg.ws_p, &mut graph_rng)?;
    let x = VarProcess::from_graph(&g, cfg.rho, cfg.noise_sigma)?.generate(cfg.steps, cfg.burn_in, &mut data_rng)?;
    Ok((x, ContinuousSystem::random(cfg.dims(), &mut sys_rng)))
}

fn vi_scan(sys: &PipelineSystems, x: &MultivariateSeries, record: bool) -> Result<ScanOutput> {
    let d = &sys.vi.discrete;
    let init = ScanState::zeros(x.vars(), d.d_h, d.d_v);
    vi_forward(&sys.vi, &sys.agg, x, &init, &ScanOptions { record_states: record, ..Default::default() })
}

fn ordered_scan(sys: &PipelineSystems, x: &MultivariateSeries, record: bool) -> Result<ScanOutput> {
    let (d_h, d_v) = sys.ordered.dims();
    ordered_forward_recording(&sys.ordered, x, &ScanState::zeros(x.vars(), d_h, d_v), record)
}

/// Per-sample features for predicting `x[t+1, c]`, one row per `(t, c)` with `t < T − 1`.
///
/// VI rows are `[h_h, h_v, x, ψ[t+1], 1]`, ordered rows `[h_h, h_v, x, 1]`. `ψ[t+1]` pools the
/// step-`t` features, so every row uses data up to `t` only.
pub fn scan_features(predictor: Predictor, sys: &PipelineSystems, x: &MultivariateSeries) -> Result<Matrix> {
    let (vars, steps) = (x.vars(), x.steps());
    let out = match predictor {
        Predictor::Vi => vi_scan(sys, x, true)?,
        Predictor::Ordered => ordered_scan(sys, x, true)?,
        Predictor::Persistence => return domain_err("persistence has no scan features"),
    };
    let states = out.states.expect("recorded");
    let (d_h, d_v) = states[0].dims();
    let psi_width = if predictor == Predictor::Vi { sys.vi.w_v.rows() } else { 0 };
    let width = d_h + d_v + 1 + psi_width + 1;
    let mut data = Vec::with_capacity((steps - 1) * vars * width);
    for t in 0..steps - 1 {
        let s = &states[t];
        for c in 0..vars {
            data.extend_from_slice(s.h_h_row(c));
            data.extend_from_slice(s.h_v_row(c));
            data.push(x.get(c, t));
            if psi_width > 0 {
                data.extend_from_slice(&out.psi_trace[t + 1]);
            }
            data.push(1.0);
        }
    }
    Matrix::new((steps - 1) * vars, width, data)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        0.0
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn time_forward(repeats: usize, mut f: impl FnMut() -> Result<ScanOutput>) -> Result<f64> {
    f()?;
    let mut samples = Vec::with_capacity(repeats);
    for _ in 0..repeats.max(1) {
        let start = Instant::now();
        f()?;
        samples.push(start.elapsed().as_secs_f64());
    }
    Ok(median(samples))
}

/// Scan features, ridge readout on the first `train_fraction` of the one-step pairs,
/// forecasts on the rest.
pub fn run_pipeline(
    predictor: Predictor,
    sys: &PipelineSystems,
    cfg: &StudyConfig,
    x: &MultivariateSeries,
) -> Result<PipelineResult> {
    let (vars, steps) = (x.vars(), x.steps());
    if steps < 4 {
        return size_err(format!("need at least 4 steps, got {steps}"));
    }
    let n_train = cfg.train_rows(steps);
    let n_test = steps - 1 - n_train;
    if n_train == 0 || n_test == 0 {
        return size_err(format!("{steps} steps leave no train/test split"));
    }
    let truth = MultivariateSeries::from_fn(vars, n_test, |c, k| x.get(c, n_train + 1 + k));
    let (predictions, seconds) = match predictor {
        Predictor::Persistence => (MultivariateSeries::from_fn(vars, n_test, |c, k| x.get(c, n_train + k)), 0.0),
        _ => {
            let feats = scan_features(predictor, sys, x)?;
            let split = n_train * vars;
            let width = feats.cols();
            let train = feats.block(0, split, 0, width);
            let targets = Matrix::from_fn(split, 1, |r, _| x.get(r % vars, r / vars + 1));
            let w = fit_ridge_readout(&train, &targets, cfg.lambda)?;
            let test = feats.block(split, feats.rows(), 0, width);
            let pred = test.matvec(w.as_slice())?;
            let series = MultivariateSeries::from_fn(vars, n_test, |c, k| pred[k * vars + c]);
            let head = x.slice_steps(0, n_train + 1);
            let seconds = match predictor {
                Predictor::Vi => time_forward(cfg.timing_repeats, || vi_scan(sys, &head, false))?,
                _ => time_forward(cfg.timing_repeats, || ordered_scan(sys, &head, false))?,
            };
            (series, seconds)
        }
    };
    let metrics = metrics_slices(predictions.as_slice(), truth.as_slice())?;
    Ok(PipelineResult { metrics, predictions, truth, seconds })
}

/// ψ the VI engine would use one step after `x` ends, for callers that need it.
pub fn next_field(sys: &PipelineSystems, out: &ScanOutput, x_last: &[f64]) -> Result<Vec<f64>> {
    let d_h = sys.vi.discrete.d_h;
    let mut proj = Vec::new();
    for (c, &xv) in x_last.iter().enumerate() {
        let mut z = out.final_state.h_h_row(c).to_vec();
        debug_assert_eq!(z.len(), d_h);
        z.push(xv);
        proj.extend(sys.vi.w_v.matvec(&z)?);
    }
    pool_flat(&sys.agg, &proj, sys.vi.w_v.rows())
}
