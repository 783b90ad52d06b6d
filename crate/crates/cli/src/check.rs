use serde_json::{json, Value};
use vissm::aggregation::{pool, AggregatorKind, AggregatorSpec};
use vissm::branches::{inverse_spectral_transform, packed_bin, spectral_transform};
use vissm::coupling::{
    all_permutations, apply_coupling, build_canonical, commutes_with_all_permutations, decompose_to_canonical,
    mode_spectrum, CanonicalCoupling,
};
use vissm::numerics::{eigenvalues, Matrix, Rng};
use vissm::scan::{ordered_forward, vi_forward, OrderedSystem, ScanOptions, ScanState, ScanSystem, Schedule};
use vissm::ssm::{certify_stability, discretize_zoh, ContinuousSystem, SystemDims};
use vissm::MultivariateSeries;

use crate::error::CliResult;

pub const SUITES: [&str; 8] = ["coupling", "depth", "stability", "zoh", "aggregation", "equivariance", "scan", "spectral"];

pub const DEFAULT_CASES: usize = 50;

#[derive(Debug, Clone, Copy)]
pub struct CheckOptions {
    pub seed: u64,
    pub cases: usize,
    pub break_coupling: bool,
}

#[derive(Debug, Clone)]
pub struct SuiteOutcome {
    pub name: &'static str,
    pub cases: usize,
    pub passed: usize,
    /// First failing case, as JSON.
    pub counterexample: Option<Value>,
}

impl SuiteOutcome {
    pub fn ok(&self) -> bool {
        self.passed == self.cases
    }
}

/// `None` when the case holds, otherwise a description of the failure.
type CaseResult = vissm::Result<Option<Value>>;

pub fn run_suite(name: &str, opts: &CheckOptions) -> CliResult<SuiteOutcome> {
    let (name, case): (&'static str, fn(&mut Rng, &CheckOptions) -> CaseResult) = match name {
        "coupling" => ("coupling", coupling_case),
        "depth" => ("depth", depth_case),
        "stability" => ("stability", stability_case),
        "zoh" => ("zoh", zoh_case),
        "aggregation" => ("aggregation", aggregation_case),
        "equivariance" => ("equivariance", equivariance_case),
        "scan" => ("scan", scan_case),
        "spectral" => ("spectral", spectral_case),
        other => return Err(crate::error::CliError::Usage(format!("unknown suite `{other}`"))),
    };
    let salt = SUITES.iter().position(|s| *s == name).unwrap_or(0) as u64;
    let mut rng = Rng::new(opts.seed ^ (salt.wrapping_mul(0x9E37_79B9_7F4A_7C15)));
    let mut passed = 0;
    let mut counterexample = None;
    for k in 0..opts.cases {
        match case(&mut rng.split(), opts)? {
            None => passed += 1,
            Some(mut v) => {
                if counterexample.is_none() {
                    v["suite"] = json!(name);
                    v["case"] = json!(k);
                    counterexample = Some(v);
                }
            }
        }
    }
    Ok(SuiteOutcome { name, cases: opts.cases, passed, counterexample })
}

fn small_dims() -> SystemDims {
    SystemDims { d_h: 3, d_v: 3, d_psi: 3, d_z: 4 }
}

fn random_series(vars: usize, steps: usize, rng: &mut Rng) -> MultivariateSeries {
    MultivariateSeries::from_fn(vars, steps, |_, _| rng.normal())
}

fn coupling_case(rng: &mut Rng, _: &CheckOptions) -> CaseResult {
    let vars = 2 + rng.below(4);
    let c = CanonicalCoupling::new(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), vars)?;
    let m = build_canonical(&c)?;
    let mut broken = m.clone();
    let (i, j) = (rng.below(vars), rng.below(vars));
    broken[(i, j)] += 0.5;

    let spec = mode_spectrum(&c);
    let mut eig: Vec<f64> = eigenvalues(&m)?.iter().map(|z| z.re).collect();
    eig.sort_by(f64::total_cmp);
    let mut expected = vec![spec.lambda_diff; vars - 1];
    expected.push(spec.lambda_mean);
    expected.sort_by(f64::total_cmp);
    let eig_err = eig.iter().zip(&expected).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);

    let canon_ok = commutes_with_all_permutations(&m)? && decompose_to_canonical(&m)?.is_ok();
    let broken_rejected = !commutes_with_all_permutations(&broken)? && decompose_to_canonical(&broken)?.is_err();
    if canon_ok && broken_rejected && eig_err < 1e-9 {
        return Ok(None);
    }
    Ok(Some(json!({
        "vars": vars, "alpha": c.alpha, "beta": c.beta, "perturbed_entry": [i, j],
        "canonical_accepted": canon_ok, "perturbed_rejected": broken_rejected, "eigenvalue_error": eig_err,
    })))
}

fn depth_case(rng: &mut Rng, _: &CheckOptions) -> CaseResult {
    let vars = 3 + rng.below(6);
    let steps = 4;
    let delta = 0.1;
    let cont = ContinuousSystem::random(small_dims(), rng);
    let vi = ScanSystem::new(&cont, delta)?;
    let ordered = OrderedSystem::from_continuous(&cont, delta)?;
    let agg = AggregatorSpec::mean();
    let init = ScanState::zeros(vars, 3, 3);
    let x = random_series(vars, steps, rng);
    let mut xp = x.clone();
    let last = steps - 1;
    xp.set(0, last, x.get(0, last) + 1.0);

    let touched = |a: &MultivariateSeries, b: &MultivariateSeries| (0..vars).filter(|&c| a.get(c, last) != b.get(c, last)).count();
    let opts = ScanOptions::default();
    let vi_depth = touched(&vi_forward(&vi, &agg, &x, &init, &opts)?.y, &vi_forward(&vi, &agg, &xp, &init, &opts)?.y);
    let ord_depth = touched(&ordered_forward(&ordered, &x, &init)?.y, &ordered_forward(&ordered, &xp, &init)?.y);
    if vi_depth == 1 && ord_depth == vars {
        return Ok(None);
    }
    Ok(Some(json!({ "vars": vars, "vi_depth": vi_depth, "ordered_depth": ord_depth })))
}

fn stability_case(rng: &mut Rng, _: &CheckOptions) -> CaseResult {
    let deltas = [0.001, 0.01, 0.1, 0.5, 1.0, 5.0];
    let mut sys = ContinuousSystem::random(small_dims(), rng);
    let stable = certify_stability(&sys, &deltas)?;
    sys.a_h[(0, 0)] = 0.1;
    let planted = certify_stability(&sys, &deltas)?;
    if stable.iter().all(|r| r.pass) && planted.iter().all(|r| !r.pass) {
        return Ok(None);
    }
    let fmt = |rs: &[vissm::ssm::StabilityReport]| rs.iter().map(|r| json!([r.delta, r.rho_h, r.rho_v, r.pass])).collect::<Vec<_>>();
    Ok(Some(json!({ "stable": fmt(&stable), "planted": fmt(&planted) })))
}

/// Integrates `X' = 𝒜X + [0 | ℬ]` from `X(0) = [I | 0]` with classical RK4.
fn rk4_flow(a: &Matrix, b: &Matrix, delta: f64, substeps: usize) -> (Matrix, Matrix) {
    let n = a.rows();
    let m = b.cols();
    let h = delta / substeps as f64;
    let rhs = |x: &Matrix, g: &Matrix| -> (Matrix, Matrix) {
        let dx = a.matmul(x).expect("shapes");
        let dg = a.matmul(g).expect("shapes").add(b).expect("shapes");
        (dx, dg)
    };
    let mut x = Matrix::identity(n);
    let mut g = Matrix::zeros(n, m);
    for _ in 0..substeps {
        let (k1x, k1g) = rhs(&x, &g);
        let (k2x, k2g) = rhs(&x.add(&k1x.scale(h / 2.0)).unwrap(), &g.add(&k1g.scale(h / 2.0)).unwrap());
        let (k3x, k3g) = rhs(&x.add(&k2x.scale(h / 2.0)).unwrap(), &g.add(&k2g.scale(h / 2.0)).unwrap());
        let (k4x, k4g) = rhs(&x.add(&k3x.scale(h)).unwrap(), &g.add(&k3g.scale(h)).unwrap());
        let sum = |k1: Matrix, k2: Matrix, k3: Matrix, k4: Matrix| {
            k1.add(&k2.scale(2.0)).unwrap().add(&k3.scale(2.0)).unwrap().add(&k4).unwrap().scale(h / 6.0)
        };
        x = x.add(&sum(k1x, k2x, k3x, k4x)).unwrap();
        g = g.add(&sum(k1g, k2g, k3g, k4g)).unwrap();
    }
    (x, g)
}

fn zoh_case(rng: &mut Rng, _: &CheckOptions) -> CaseResult {
    let sys = ContinuousSystem::random(small_dims(), rng);
    let delta = [0.01, 0.1, 0.5, 1.0][rng.below(4)];
    let d = discretize_zoh(&sys, delta)?;
    let (a_ref, b_ref) = rk4_flow(&sys.state_matrix(), &sys.input_matrix(), delta, 400);
    let err_a = d.a_bar.max_abs_diff(&a_ref);
    let err_b = d.b_bar.max_abs_diff(&b_ref);
    let top_right = d.a_bar.block(0, 3, 3, 6).norm_inf();
    if err_a < 1e-9 && err_b < 1e-9 && top_right == 0.0 {
        return Ok(None);
    }
    Ok(Some(json!({ "delta": delta, "a_bar_error": err_a, "b_bar_error": err_b, "upper_block_norm": top_right })))
}

fn aggregation_case(rng: &mut Rng, _: &CheckOptions) -> CaseResult {
    let vars = 2 + rng.below(4);
    let width = 3;
    let items: Vec<Vec<f64>> = (0..vars).map(|_| (0..width).map(|_| rng.normal()).collect()).collect();
    for kind in [AggregatorKind::Mean, AggregatorKind::Sum, AggregatorKind::Attention] {
        let spec = AggregatorSpec::of_kind(kind, width);
        let reference = pool(&spec, &items)?;
        for perm in all_permutations(vars) {
            let permuted: Vec<Vec<f64>> = perm.iter().map(|&p| items[p].clone()).collect();
            let got = pool(&spec, &permuted)?;
            if got != reference {
                return Ok(Some(json!({ "aggregator": kind.name(), "vars": vars, "perm": perm, "expected": reference, "got": got })));
            }
        }
    }
    Ok(None)
}

fn equivariance_case(rng: &mut Rng, opts: &CheckOptions) -> CaseResult {
    let vars = 3 + rng.below(4);
    let steps = 12;
    let coupling = CanonicalCoupling::new(rng.uniform(0.5, 1.0), rng.uniform(-0.2, 0.2), vars)?;
    let mut m = build_canonical(&coupling)?;
    if opts.break_coupling {
        m[(0, 1)] += 0.25;
    }
    let sys = ScanSystem::new(&ContinuousSystem::random(small_dims(), rng), 0.1)?;
    let agg = AggregatorSpec::of_kind([AggregatorKind::Mean, AggregatorKind::Sum, AggregatorKind::Attention][rng.below(3)], 3);
    let init = ScanState::zeros(vars, 3, 3);
    let x = random_series(vars, steps, rng);
    let mut perm = rng.permutation(vars);
    if perm.iter().enumerate().all(|(i, &p)| i == p) {
        perm.rotate_left(1);
    }
    let scan_opts = ScanOptions::default();
    let y = vi_forward(&sys, &agg, &apply_coupling(&m, &x)?, &init, &scan_opts)?.y;
    let yp = vi_forward(&sys, &agg, &apply_coupling(&m, &x.permute_vars(&perm)?)?, &init, &scan_opts)?.y;
    let expected = y.permute_vars(&perm)?;
    if yp == expected {
        return Ok(None);
    }
    let (mut worst, mut at) = (0.0, (0, 0));
    for c in 0..vars {
        for t in 0..steps {
            let d = (yp.get(c, t) - expected.get(c, t)).abs();
            if d > worst {
                worst = d;
                at = (c, t);
            }
        }
    }
    Ok(Some(json!({
        "vars": vars, "steps": steps, "alpha": coupling.alpha, "beta": coupling.beta,
        "coupling_broken": opts.break_coupling, "aggregator": agg.kind.name(), "perm": perm,
        "max_abs_deviation": worst, "at_var": at.0, "at_step": at.1,
    })))
}

fn scan_case(rng: &mut Rng, _: &CheckOptions) -> CaseResult {
    let vars = 2 + rng.below(5);
    let steps = 16;
    let sys = ScanSystem::new(&ContinuousSystem::random(small_dims(), rng), 0.1)?;
    let agg = AggregatorSpec::mean();
    let init = ScanState::zeros(vars, 3, 3);
    let (x1, x2) = (random_series(vars, steps, rng), random_series(vars, steps, rng));
    let (a, b) = (rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0));
    let run = |x: &MultivariateSeries, schedule| {
        vi_forward(&sys, &agg, x, &init, &ScanOptions { schedule, ..Default::default() }).map(|o| o.y)
    };
    let y1 = run(&x1, Schedule::Parallel)?;
    let y2 = run(&x2, Schedule::Parallel)?;
    let combined = run(&x1.scaled_add(a, &x2, b), Schedule::Parallel)?;
    let scale = 1.0 + y1.as_slice().iter().chain(y2.as_slice()).fold(0.0f64, |m, v| m.max(v.abs()));
    let lin_err = combined.max_abs_diff(&y1.scaled_add(a, &y2, b)) / scale;
    let asc = run(&x1, Schedule::Ascending)?;
    let desc = run(&x1, Schedule::Descending)?;
    let schedules_equal = asc == y1 && desc == y1;
    if lin_err < 1e-9 && schedules_equal {
        return Ok(None);
    }
    Ok(Some(json!({ "vars": vars, "a": a, "b": b, "linearity_error": lin_err, "schedules_equal": schedules_equal })))
}

fn spectral_case(rng: &mut Rng, _: &CheckOptions) -> CaseResult {
    let steps = 2 * (2 + rng.below(31));
    let vars = 1 + rng.below(3);
    let x = random_series(vars, steps, rng);
    let packed = spectral_transform(&x)?;
    let back = inverse_spectral_transform(&packed)?;
    let round_trip = back.max_abs_diff(&x);

    let k = 1 + rng.below(steps / 2 - 1);
    let tone = MultivariateSeries::from_fn(1, steps, |_, t| (std::f64::consts::TAU * (k * t) as f64 / steps as f64).cos());
    let tp = spectral_transform(&tone)?;
    let peak = (0..steps).max_by(|&i, &j| tp.get(0, i).abs().total_cmp(&tp.get(0, j).abs())).unwrap_or(0);
    let off_peak = (0..steps).filter(|&i| packed_bin(i, steps) != k).map(|i| tp.get(0, i).abs()).fold(0.0, f64::max);

    if packed.steps() == steps && round_trip < 1e-10 && packed_bin(peak, steps) == k && off_peak < 1e-9 * steps as f64 {
        return Ok(None);
    }
    Ok(Some(json!({ "steps": steps, "round_trip_error": round_trip, "tone_bin": k, "peak_bin": packed_bin(peak, steps), "off_peak": off_peak })))
}
