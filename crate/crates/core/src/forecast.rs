//! One-step forecasting of user data with the three-branch model and a ridge readout.
//!
//! Each variable is z-normalized with statistics from the training span. Per step `t` the
//! features of variable `c` are the long- and short-branch states, the final state of a
//! spectral scan over the trailing window `x[t−L+1 ..= t]`, the gated fusion of the three
//! branch outputs, the current value and an intercept.

use crate::aggregation::AggregatorSpec;
use crate::branches::{fuse, run_branch_output, spectral_transform, Branch, BranchConfig, BranchTemplates, GateParams};
use crate::error::{domain_err, size_err, Result};
use crate::numerics::{Matrix, Rng};
use crate::scan::{vi_forward, ScanState, ScanSystem};
use crate::series::MultivariateSeries;
use crate::sim::{fit_ridge_readout, metrics_slices, Metrics};
use crate::ssm::SystemDims;

#[derive(Debug, Clone, PartialEq)]
pub struct ForecastConfig {
    pub branches: BranchConfig,
    pub gate: GateParams,
    pub dims: SystemDims,
    pub shared_templates: bool,
    pub train_fraction: f64,
    pub lambda: f64,
    /// Trailing window for the spectral features; even, at least 4.
    pub window: usize,
    pub std_floor: f64,
    pub seed: u64,
}

impl Default for ForecastConfig {
    fn default() -> Self {
        Self {
            branches: BranchConfig::default(),
            gate: GateParams::default(),
            dims: SystemDims { d_h: 8, d_v: 8, d_psi: 8, d_z: 9 },
            shared_templates: true,
            train_fraction: 0.8,
            lambda: 1e-3,
            window: 32,
            std_floor: 1e-8,
            seed: 0,
        }
    }
}

impl ForecastConfig {
    pub fn validate(&self) -> Result<()> {
        self.branches.validate()?;
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return domain_err(format!("train fraction {} must lie in (0, 1)", self.train_fraction));
        }
        if !(self.lambda >= 0.0) || !(self.std_floor > 0.0) {
            return domain_err("ridge penalty must be nonnegative and the std floor positive");
        }
        if self.window < 4 || self.window % 2 != 0 {
            return size_err(format!("spectral window must be even and at least 4, got {}", self.window));
        }
        Ok(())
    }

    fn train_rows(&self, steps: usize) -> usize {
        (self.train_fraction * (steps - 1) as f64).floor() as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForecastResult {
    /// First target step of the test span; column `k` of the outputs is step `first_target + k`.
    pub first_target: usize,
    pub predictions: MultivariateSeries,
    pub truth: MultivariateSeries,
    pub metrics: Metrics,
    pub persistence: Metrics,
}

/// Per-variable mean and scale over the first `span` steps.
pub fn normalization(x: &MultivariateSeries, span: usize, floor: f64) -> (Vec<f64>, Vec<f64>) {
    (0..x.vars())
        .map(|c| {
            let row = &x.row(c)[..span];
            let mean = row.iter().sum::<f64>() / span as f64;
            let var = row.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / span as f64;
            let std = var.sqrt();
            (mean, if std < floor { 1.0 } else { std })
        })
        .unzip()
}

fn spectral_window_states(
    cfg: &ForecastConfig,
    templates: &BranchTemplates,
    z: &MultivariateSeries,
) -> Result<(Vec<ScanState>, MultivariateSeries)> {
    let (vars, steps, l) = (z.vars(), z.steps(), cfg.window);
    let sys = ScanSystem::new(templates.template(Branch::Spectral), cfg.branches.delta_freq)?;
    let dims = templates.template(Branch::Spectral).dims();
    let agg = match cfg.branches.agg.kind {
        crate::aggregation::AggregatorKind::Attention => AggregatorSpec::default_attention(dims.d_psi),
        _ => cfg.branches.agg.clone(),
    };
    let init = ScanState::zeros(vars, dims.d_h, dims.d_v);
    let mut states = Vec::with_capacity(steps);
    let mut y = MultivariateSeries::zeros(vars, steps);
    for t in 0..steps {
        let window = MultivariateSeries::from_fn(vars, l, |c, k| {
            let s = (t + 1 + k).checked_sub(l);
            s.map_or(0.0, |s| z.get(c, s))
        });
        let out = vi_forward(&sys, &agg, &spectral_transform(&window)?, &init, &cfg.branches.scan)?;
        for c in 0..vars {
            y.set(c, t, out.y.get(c, l - 1));
        }
        states.push(out.final_state);
    }
    Ok((states, y))
}

/// Runs the full pipeline and forecasts every step after the training span.
pub fn forecast(cfg: &ForecastConfig, x: &MultivariateSeries) -> Result<ForecastResult> {
    cfg.validate()?;
    let (vars, steps) = (x.vars(), x.steps());
    if vars == 0 || steps < 3 {
        return size_err(format!("need at least one variable and 3 steps, got {vars} × {steps}"));
    }
    let n_train = cfg.train_rows(steps);
    if n_train < cfg.window || n_train + 1 >= steps {
        return size_err(format!(
            "{steps} steps are too few: the training span ({n_train}) must cover the spectral window ({}) and leave a test span",
            cfg.window
        ));
    }
    let (mean, scale) = normalization(x, n_train + 1, cfg.std_floor);
    let z = MultivariateSeries::from_fn(vars, steps, |c, t| (x.get(c, t) - mean[c]) / scale[c]);

    let templates = BranchTemplates::random(
        cfg.dims,
        cfg.shared_templates,
        &cfg.branches,
        cfg.branches.agg.kind,
        vars,
        &mut Rng::new(cfg.seed),
    )?;
    let long = run_branch_output(Branch::Long, &cfg.branches, &templates, &z, true)?;
    let short = run_branch_output(Branch::Short, &cfg.branches, &templates, &z, true)?;
    let (spec_states, spec_y) = spectral_window_states(cfg, &templates, &z)?;
    let fused = fuse(&cfg.gate, &long.y, &short.y, &spec_y)?;
    let long_states = long.states.expect("recorded");
    let short_states = short.states.expect("recorded");

    let width = {
        let s = &long_states[0];
        let (a, b) = s.dims();
        let (c, d) = short_states[0].dims();
        let (e, f) = spec_states[0].dims();
        a + b + c + d + e + f + 3
    };
    let rows = (steps - 1) * vars;
    let mut data = Vec::with_capacity(rows * width);
    for t in 0..steps - 1 {
        for c in 0..vars {
            for s in [&long_states[t], &short_states[t], &spec_states[t]] {
                data.extend_from_slice(s.h_h_row(c));
                data.extend_from_slice(s.h_v_row(c));
            }
            data.push(fused.get(c, t));
            data.push(z.get(c, t));
            data.push(1.0);
        }
    }
    let feats = Matrix::new(rows, width, data)?;
    let split = n_train * vars;
    let targets = Matrix::from_fn(split, 1, |r, _| z.get(r % vars, r / vars + 1));
    let w = fit_ridge_readout(&feats.block(0, split, 0, width), &targets, cfg.lambda)?;
    let pred = feats.block(split, rows, 0, width).matvec(w.as_slice())?;

    let n_test = steps - 1 - n_train;
    let predictions = MultivariateSeries::from_fn(vars, n_test, |c, k| pred[k * vars + c] * scale[c] + mean[c]);
    let truth = MultivariateSeries::from_fn(vars, n_test, |c, k| x.get(c, n_train + 1 + k));
    let persist = MultivariateSeries::from_fn(vars, n_test, |c, k| x.get(c, n_train + k));
    Ok(ForecastResult {
        first_target: n_train + 1,
        metrics: metrics_slices(predictions.as_slice(), truth.as_slice())?,
        persistence: metrics_slices(persist.as_slice(), truth.as_slice())?,
        predictions,
        truth,
    })
}
