//! Acceptance gate. Runs every criterion serially, prints one PASS/FAIL line each and exits
//! nonzero if any fails. Oracles are written here, independent of the library code paths.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use vissm::aggregation::{AggregatorKind, AggregatorSpec};
use vissm::branches::{run_branch_output, spectral_activity, spectral_transform, Branch, BranchConfig, BranchTemplates};
use vissm::coupling::{build_canonical, commutes_with_all_permutations, decompose_to_canonical, mode_spectrum, CanonicalCoupling};
use vissm::scan::{ordered_forward, vi_forward, OrderedSystem, ScanOptions, ScanState, ScanSystem, Schedule};
use vissm::sim::{
    run_cscaling_study, run_permutation_study, run_pipeline, simulate_instance, PipelineSystems, Predictor, StudyConfig,
    CSCALING_VALUES,
};
use vissm::ssm::{certify_stability, discretize_zoh, ContinuousSystem, SystemDims};
use vissm::{Matrix, MultivariateSeries, Rng};

// Tolerances and thresholds.
const EIG_TOL: f64 = 1e-9;
const ZOH_TOL: f64 = 1e-8;
const RK4_SUBSTEPS: usize = 1000;
const CONV_TOL: f64 = 1e-8;
const SENSITIVITY_MIN: f64 = 1e-3;
const SENSITIVE_REQUIRED: usize = 45;
const COUPLING_RUNTIME_S: f64 = 5.0;
const PERMUTATION_RUNTIME_S: f64 = 120.0;
const VI_RATIO_MAX: f64 = 2.0;
const ORDERED_RATIO_MIN: f64 = 4.0;
const MAE_AGREEMENT: f64 = 0.10;
const MSE_GAIN_MIN: f64 = 0.20;
const TONE_BIN_SLACK: usize = 2;
const TONE_REQUIRED: usize = 95;
const LINEARITY_TOL: f64 = 1e-9;

// Reference values for the logs only.
const REF_MAE: f64 = 0.093;
const REF_MAPE_STD_VI: f64 = 0.050;
const REF_MAPE_STD_ORDERED: f64 = 0.130;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

// ---------------------------------------------------------------------------
// small dense helpers on Vec<Vec<f64>>

type Dense = Vec<Vec<f64>>;

fn dense(m: &Matrix) -> Dense {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

fn zeros(r: usize, c: usize) -> Dense {
    vec![vec![0.0; c]; r]
}

fn eye(n: usize) -> Dense {
    let mut m = zeros(n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    m
}

fn mul(a: &Dense, b: &Dense) -> Dense {
    let (n, k, m) = (a.len(), b.len(), b[0].len());
    let mut out = zeros(n, m);
    for i in 0..n {
        for p in 0..k {
            let aip = a[i][p];
            for j in 0..m {
                out[i][j] += aip * b[p][j];
            }
        }
    }
    out
}

fn axpy(a: &Dense, s: f64, b: &Dense) -> Dense {
    a.iter().zip(b).map(|(r, q)| r.iter().zip(q).map(|(x, y)| x + s * y).collect()).collect()
}

fn max_diff(a: &Dense, b: &Dense) -> f64 {
    a.iter().flatten().zip(b.iter().flatten()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// All permutations of `0..n`, by Heap's algorithm.
fn heap_permutations(n: usize) -> Vec<Vec<usize>> {
    let mut a: Vec<usize> = (0..n).collect();
    let mut out = vec![a.clone()];
    let mut c = vec![0; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            out.push(a.clone());
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

/// Cyclic Jacobi eigenvalues of a symmetric matrix.
fn jacobi_eigenvalues(m: &Dense) -> Vec<f64> {
    let n = m.len();
    let mut a = m.clone();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    eig.sort_by(f64::total_cmp);
    eig
}

/// RK4 flow of `X' = AX`, `G' = AG + B` over `delta` from `(I, 0)`.
fn rk4_zoh(a: &Dense, b: &Dense, delta: f64, substeps: usize) -> (Dense, Dense) {
    let h = delta / substeps as f64;
    let f = |x: &Dense, g: &Dense| (mul(a, x), axpy(&mul(a, g), 1.0, b));
    let mut x = eye(a.len());
    let mut g = zeros(b.len(), b[0].len());
    for _ in 0..substeps {
        let (k1x, k1g) = f(&x, &g);
        let (k2x, k2g) = f(&axpy(&x, h / 2.0, &k1x), &axpy(&g, h / 2.0, &k1g));
        let (k3x, k3g) = f(&axpy(&x, h / 2.0, &k2x), &axpy(&g, h / 2.0, &k2g));
        let (k4x, k4g) = f(&axpy(&x, h, &k3x), &axpy(&g, h, &k3g));
        let inc = |k1: &Dense, k2: &Dense, k3: &Dense, k4: &Dense| axpy(&axpy(&axpy(k1, 2.0, k2), 2.0, k3), 1.0, k4);
        x = axpy(&x, h / 6.0, &inc(&k1x, &k2x, &k3x, &k4x));
        g = axpy(&g, h / 6.0, &inc(&k1g, &k2g, &k3g, &k4g));
    }
    (x, g)
}

fn random_series(vars: usize, steps: usize, rng: &mut Rng) -> MultivariateSeries {
    MultivariateSeries::from_fn(vars, steps, |_, _| rng.normal())
}

fn random_state(vars: usize, d_h: usize, d_v: usize, rng: &mut Rng) -> ScanState {
    let hh = (0..vars * d_h).map(|_| rng.normal()).collect();
    let hv = (0..vars * d_v).map(|_| rng.normal()).collect();
    ScanState::new(vars, d_h, d_v, hh, hv).unwrap()
}

const AGGREGATORS: [AggregatorKind; 3] = [AggregatorKind::Mean, AggregatorKind::Sum, AggregatorKind::Attention];

// ---------------------------------------------------------------------------

fn c1_coupling_completeness() -> Outcome {
    let start = Instant::now();
    let mut rng = Rng::new(101);
    let mut disagreements = 0;
    let mut equivariant = 0;
    let mut total = 0;
    for vars in [2, 3, 4] {
        let perms = heap_permutations(vars);
        for k in 0..200 {
            // A third canonical, a third canonical with one entry nudged, a third generic.
            let m = match k % 3 {
                0 => build_canonical(&CanonicalCoupling::new(rng.normal(), rng.normal(), vars).unwrap()).unwrap(),
                1 => {
                    let mut m = build_canonical(&CanonicalCoupling::new(rng.normal(), rng.normal(), vars).unwrap()).unwrap();
                    let (i, j) = (rng.below(vars), rng.below(vars));
                    m[(i, j)] += rng.uniform(0.01, 1.0);
                    m
                }
                _ => Matrix::from_fn(vars, vars, |_, _| rng.normal()),
            };
            let md = dense(&m);
            let oracle = perms.iter().all(|p| (0..vars).all(|i| (0..vars).all(|j| md[p[i]][p[j]] == md[i][j])));
            let commutes = commutes_with_all_permutations(&m).unwrap();
            let decomposes = decompose_to_canonical(&m).unwrap().is_ok();
            if commutes != decomposes || commutes != oracle {
                disagreements += 1;
            }
            equivariant += usize::from(oracle);
            total += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        disagreements == 0 && secs < COUPLING_RUNTIME_S,
        format!("{total} matrices, {equivariant} equivariant, {disagreements} disagreements, {secs:.3}s"),
    )
}

fn c2_mode_spectrum() -> Outcome {
    let mut rng = Rng::new(202);
    let (mut worst, mut flag_mismatch) = (0.0f64, 0);
    for _ in 0..100 {
        let vars = 2 + rng.below(4);
        let c = CanonicalCoupling::new(rng.uniform(-1.5, 1.5), rng.uniform(-0.6, 0.6), vars).unwrap();
        let spec = mode_spectrum(&c);
        let numeric = jacobi_eigenvalues(&dense(&build_canonical(&c).unwrap()));
        let mut expected = vec![c.alpha; vars - 1];
        expected.push(c.alpha + vars as f64 * c.beta);
        expected.sort_by(f64::total_cmp);
        let err = numeric.iter().zip(&expected).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst = worst.max(err).max((spec.lambda_diff - c.alpha).abs());
        let rho = numeric.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if spec.stable != (rho < 1.0) {
            flag_mismatch += 1;
        }
    }
    outcome(worst < EIG_TOL && flag_mismatch == 0, format!("max eigenvalue error {worst:.2e}, stability flag mismatches {flag_mismatch}"))
}

fn c3_stability_certificate() -> Outcome {
    let deltas = [0.01, 0.1, 1.0, 10.0];
    let mut rng = Rng::new(303);
    let (mut stable_pass, mut planted_fail, mut hurwitz_checked) = (0, 0, 0);
    let dims = SystemDims { d_h: 4, d_v: 4, d_psi: 4, d_z: 5 };
    for _ in 0..50 {
        let mut sys = ContinuousSystem::random(dims, &mut rng);
        // Diagonal plus coupling, with off-diagonal row mass at most half of |diagonal|.
        for a in [&mut sys.a_h, &mut sys.a_v] {
            let n = a.rows();
            for i in 0..n {
                let raw: Vec<f64> = (0..n).map(|j| if j == i { 0.0 } else { rng.normal() }).collect();
                let mass: f64 = raw.iter().map(|v| v.abs()).sum();
                let budget = 0.5 * a[(i, i)].abs() * rng.next_f64();
                for j in 0..n {
                    if j != i && mass > 0.0 {
                        a[(i, j)] = raw[j] * budget / mass;
                    }
                }
            }
        }
        // Gershgorin: every disc sits in the open left half-plane.
        let gersh = |a: &Matrix| (0..a.rows()).all(|i| a[(i, i)] + (0..a.cols()).filter(|&j| j != i).map(|j| a[(i, j)].abs()).sum::<f64>() < 0.0);
        hurwitz_checked += usize::from(gersh(&sys.a_h) && gersh(&sys.a_v));
        if certify_stability(&sys, &deltas).unwrap().iter().all(|r| r.pass) {
            stable_pass += 1;
        }
        for j in 0..4 {
            sys.a_h[(0, j)] = 0.0;
        }
        sys.a_h[(0, 0)] = 0.1;
        if certify_stability(&sys, &deltas).unwrap().iter().all(|r| !r.pass) {
            planted_fail += 1;
        }
    }
    outcome(
        hurwitz_checked == 50 && stable_pass == 50 && planted_fail == 50,
        format!("Hurwitz systems certified {stable_pass}/50, planted Re=+0.1 rejected at every step {planted_fail}/50"),
    )
}

fn c4_zoh_vs_rk4() -> Outcome {
    let mut rng = Rng::new(404);
    let dims = SystemDims { d_h: 4, d_v: 4, d_psi: 4, d_z: 5 };
    let mut worst = 0.0f64;
    for k in 0..20 {
        let sys = ContinuousSystem::random(dims, &mut rng);
        let delta = [0.05, 0.2, 0.5, 1.0][k % 4];
        let d = discretize_zoh(&sys, delta).unwrap();
        let (a_ref, b_ref) = rk4_zoh(&dense(&sys.state_matrix()), &dense(&sys.input_matrix()), delta, RK4_SUBSTEPS);
        worst = worst.max(max_diff(&dense(&d.a_bar), &a_ref)).max(max_diff(&dense(&d.b_bar), &b_ref));
    }
    outcome(worst < ZOH_TOL, format!("max deviation from {RK4_SUBSTEPS}-substep RK4 {worst:.2e} over 20 systems"))
}

fn c5_recurrence_vs_convolution() -> Outcome {
    let mut rng = Rng::new(505);
    let steps = 32;
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let vars = 2 + rng.below(4);
        let dims = SystemDims { d_h: 3, d_v: 3, d_psi: 2, d_z: 4 };
        let mut cont = ContinuousSystem::random(dims, &mut rng);
        cont.scale_global_coupling(0.5);
        let sys = ScanSystem::new(&cont, rng.uniform(0.05, 0.5)).unwrap();
        let kind = AGGREGATORS[rng.below(3)];
        let agg = AggregatorSpec::of_kind(kind, 2);
        let x = random_series(vars, steps, &mut rng);
        let init = random_state(vars, 3, 3, &mut rng);
        let out = vi_forward(&sys, &agg, &x, &init, &ScanOptions::default()).unwrap();

        // Effective one-step system of the current-lag recurrence.
        let d = &sys.discrete;
        let a = dense(&d.a_bar);
        let b = dense(&d.b_bar);
        let (dh, n) = (d.d_h, d.d_h + d.d_v);
        let mut a_eff = zeros(n, n);
        let mut b_eff = zeros(n, b[0].len());
        let a_hh: Dense = a[..dh].iter().map(|r| r[..dh].to_vec()).collect();
        let a_vh: Dense = a[dh..].iter().map(|r| r[..dh].to_vec()).collect();
        let vh_ah = mul(&a_vh, &a_hh);
        let vh_bh = mul(&a_vh, &b[..dh].to_vec());
        for i in 0..n {
            for j in 0..n {
                a_eff[i][j] = if i < dh {
                    if j < dh { a[i][j] } else { 0.0 }
                } else if j < dh {
                    vh_ah[i - dh][j]
                } else {
                    a[i][j]
                };
            }
            for j in 0..b[0].len() {
                b_eff[i][j] = if i < dh { b[i][j] } else { vh_bh[i - dh][j] + b[i][j] };
            }
        }
        let readout: Vec<f64> = sys.c_h.iter().chain(&sys.c_v).copied().collect();
        // Kernels C Ā^k B̄ and free-response rows C Ā^{t+1}.
        let mut power = eye(n);
        let mut kernels = Vec::with_capacity(steps);
        let mut free = Vec::with_capacity(steps);
        for _ in 0..steps {
            let pb = mul(&power, &b_eff);
            kernels.push((0..pb[0].len()).map(|j| (0..n).map(|i| readout[i] * pb[i][j]).sum()).collect::<Vec<f64>>());
            power = mul(&a_eff, &power);
            free.push((0..n).map(|j| (0..n).map(|i| readout[i] * power[i][j]).sum::<f64>()).collect::<Vec<f64>>());
        }
        for c in 0..vars {
            let h0: Vec<f64> = init.h_h_row(c).iter().chain(init.h_v_row(c)).copied().collect();
            for t in 0..steps {
                let mut y = free[t].iter().zip(&h0).map(|(p, q)| p * q).sum::<f64>();
                for k in 0..=t {
                    let mut u = out.psi_trace[t - k].clone();
                    u.push(x.get(c, t - k));
                    y += kernels[k].iter().zip(&u).map(|(p, q)| p * q).sum::<f64>();
                }
                worst = worst.max((y - out.y.get(c, t)).abs());
            }
        }
    }
    outcome(worst < CONV_TOL, format!("max |recurrence - convolution| {worst:.2e} at T={steps} over 20 systems"))
}

fn c6_equivariance() -> Outcome {
    let mut rng = Rng::new(606);
    let steps = 64;
    let dims = SystemDims { d_h: 4, d_v: 4, d_psi: 4, d_z: 5 };
    let (mut exact, mut checked, mut sensitive) = (0, 0, 0);
    for _ in 0..50 {
        let vars = 2 + rng.below(7);
        let mut cont = ContinuousSystem::random(dims, &mut rng);
        cont.scale_global_coupling(0.3);
        let delta = rng.uniform(0.05, 0.5);
        let sys = ScanSystem::new(&cont, delta).unwrap();
        let x = random_series(vars, steps, &mut rng);
        let init = random_state(vars, 4, 4, &mut rng);
        let mut perm = rng.permutation(vars);
        if perm.iter().enumerate().all(|(i, &p)| i == p) {
            perm.rotate_left(1);
        }
        let xp = x.permute_vars(&perm).unwrap();
        let ip = init.permute(&perm).unwrap();
        for kind in AGGREGATORS {
            let agg = AggregatorSpec::of_kind(kind, 4);
            let base = vi_forward(&sys, &agg, &x, &init, &ScanOptions::default()).unwrap();
            let moved = vi_forward(&sys, &agg, &xp, &ip, &ScanOptions::default()).unwrap();
            checked += 1;
            if moved.y == base.y.permute_vars(&perm).unwrap()
                && moved.final_state == base.final_state.permute(&perm).unwrap()
                && moved.psi_trace == base.psi_trace
            {
                exact += 1;
            }
        }
        let ordered = OrderedSystem::from_continuous(&cont, delta).unwrap();
        let zero = ScanState::zeros(vars, 4, 4);
        let base = ordered_forward(&ordered, &x, &zero).unwrap().y.permute_vars(&perm).unwrap();
        let moved = ordered_forward(&ordered, &xp, &zero).unwrap().y;
        if moved.max_abs_diff(&base) > SENSITIVITY_MIN {
            sensitive += 1;
        }
    }
    outcome(
        exact == checked && sensitive >= SENSITIVE_REQUIRED,
        format!("VI bit-exact {exact}/{checked} (3 aggregators), ordered sensitivity witnessed {sensitive}/50"),
    )
}

fn c7_permutation_study() -> Outcome {
    let cfg = StudyConfig::default();
    let start = Instant::now();
    let report = run_permutation_study(&cfg, 10, &mut Rng::new(707)).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let vi = report.aggregate(Predictor::Vi, cfg.vars).unwrap();
    let ord = report.aggregate(Predictor::Ordered, cfg.vars).unwrap();
    // Independent spread check from the per-trial records.
    let vi_values: Vec<u64> = report.records_for(Predictor::Vi).map(|r| r.mae.to_bits()).collect();
    let vi_identical = vi_values.windows(2).all(|w| w[0] == w[1]);
    let pass = vi.mae.std == 0.0
        && vi.mape.std == 0.0
        && vi.mse.std == 0.0
        && vi_identical
        && ord.mae.std > 0.0
        && secs < PERMUTATION_RUNTIME_S;
    outcome(
        pass,
        format!(
            "C={} T={} 10 orderings: VI MAE std {:e} MAPE std {:e}; ordered MAE std {:.2e} MAPE std {:.3e} \
             (reference MAPE std {REF_MAPE_STD_VI} vs {REF_MAPE_STD_ORDERED}); {secs:.1}s",
            cfg.vars, cfg.steps, vi.mae.std, vi.mape.std, ord.mae.std, ord.mape.std
        ),
    )
}

fn c8_cscaling() -> Outcome {
    let cfg = StudyConfig { steps: 256, ..Default::default() };
    let report = run_cscaling_study(&CSCALING_VALUES, &cfg, &mut Rng::new(808)).unwrap();
    let (lo, hi) = (CSCALING_VALUES[0], CSCALING_VALUES[CSCALING_VALUES.len() - 1]);
    let time = |e, c| report.aggregate(e, c).unwrap().median_seconds;
    let vi_ratio = time(Predictor::Vi, hi) / time(Predictor::Vi, lo);
    let ord_ratio = time(Predictor::Ordered, hi) / time(Predictor::Ordered, lo);
    let mut worst_gap = 0.0f64;
    let mut per_c = Vec::new();
    for c in CSCALING_VALUES {
        let (v, o) = (report.aggregate(Predictor::Vi, c).unwrap().mae.mean, report.aggregate(Predictor::Ordered, c).unwrap().mae.mean);
        let gap = (v - o).abs() / o;
        worst_gap = worst_gap.max(gap);
        per_c.push(format!("C={c} vi {:.3e}s/mae {v:.4} ord {:.3e}s/mae {o:.4}", time(Predictor::Vi, c), time(Predictor::Ordered, c)));
    }
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    outcome(
        vi_ratio < VI_RATIO_MAX && ord_ratio > ORDERED_RATIO_MIN && worst_gap <= MAE_AGREEMENT,
        format!(
            "time ratio C={hi}/C={lo}: VI {vi_ratio:.2} (need < {VI_RATIO_MAX}), ordered {ord_ratio:.2} (need > {ORDERED_RATIO_MIN}); \
             worst MAE gap {:.1}%; {threads} hardware thread(s); [{}]",
            100.0 * worst_gap,
            per_c.join("; ")
        ),
    )
}

fn c9_accuracy_vs_persistence() -> Outcome {
    let cfg = StudyConfig::default();
    let mut rng = Rng::new(909);
    let (x, template) = simulate_instance(&cfg, cfg.vars, &mut rng).unwrap();
    let systems = PipelineSystems::new(&template, &cfg, cfg.vars).unwrap();
    let vi = run_pipeline(Predictor::Vi, &systems, &cfg, &x).unwrap();
    let lib_persist = run_pipeline(Predictor::Persistence, &systems, &cfg, &x).unwrap();
    // Persistence MSE recomputed here over the same target span.
    let first = x.steps() - vi.truth.steps();
    let mut sq = 0.0;
    for c in 0..x.vars() {
        for t in first..x.steps() {
            sq += (x.get(c, t) - x.get(c, t - 1)).powi(2);
        }
    }
    let persist_mse = sq / (x.vars() * (x.steps() - first)) as f64;
    let consistent = (persist_mse - lib_persist.metrics.mse).abs() <= 1e-12 * persist_mse.max(1.0);
    let gain = 1.0 - vi.metrics.mse / persist_mse;
    outcome(
        consistent && gain >= MSE_GAIN_MIN,
        format!(
            "VI MSE {:.5} vs persistence {persist_mse:.5}: {:.1}% better (need {:.0}%); VI MAE {:.4} (reference {REF_MAE}), MAPE {:.1}%",
            vi.metrics.mse,
            100.0 * gain,
            100.0 * MSE_GAIN_MIN,
            vi.metrics.mae,
            vi.metrics.mape
        ),
    )
}

fn c10_spectral() -> Outcome {
    // Repacked width and DC concentration.
    let mut width_ok = true;
    let mut dc_ok = true;
    for steps in (4..=64).step_by(2) {
        let level = 0.5 + steps as f64 / 10.0;
        let p = spectral_transform(&MultivariateSeries::from_fn(2, steps, |_, _| level)).unwrap();
        width_ok &= p.steps() == steps && p.vars() == 2;
        let rest = (1..steps).map(|i| p.get(0, i).abs()).fold(0.0, f64::max);
        dc_ok &= (p.get(0, 0) - level * steps as f64).abs() < 1e-9 * steps as f64 && rest < 1e-9 * steps as f64;
    }
    // Tone localization in the spectral branch's state activity.
    let cfg = BranchConfig::default();
    let steps = 64;
    let mut hits = 0;
    for seed in 0..100u64 {
        let mut rng = Rng::new(1000 + seed);
        let templates = BranchTemplates::random(SystemDims::DEFAULT, false, &cfg, AggregatorKind::Mean, 2, &mut rng).unwrap();
        let bin = 1 + rng.below(steps / 2 - 2);
        let phase = rng.uniform(0.0, std::f64::consts::TAU);
        let x = MultivariateSeries::from_fn(2, steps, |_, t| (std::f64::consts::TAU * (bin * t) as f64 / steps as f64 + phase).cos());
        let out = run_branch_output(Branch::Spectral, &cfg, &templates, &x, true).unwrap();
        let activity = spectral_activity(&out.states.unwrap());
        let peak = (0..activity.len()).max_by(|&a, &b| activity[a].total_cmp(&activity[b])).unwrap();
        hits += usize::from(peak.abs_diff(bin) <= TONE_BIN_SLACK);
    }
    outcome(
        width_ok && dc_ok && hits >= TONE_REQUIRED,
        format!("width = T for even T in 4..=64: {width_ok}; DC-only energy: {dc_ok}; tone within ±{TONE_BIN_SLACK} bins {hits}/100"),
    )
}

fn c11_linearity_and_schedules() -> Outcome {
    let mut rng = Rng::new(1111);
    let dims = SystemDims { d_h: 3, d_v: 3, d_psi: 3, d_z: 4 };
    let (mut worst, mut schedules_equal) = (0.0f64, 0);
    for k in 0..100 {
        let vars = 1 + rng.below(8);
        let steps = 8 + rng.below(40);
        let mut cont = ContinuousSystem::random(dims, &mut rng);
        cont.scale_global_coupling(0.3);
        let sys = ScanSystem::new(&cont, rng.uniform(0.05, 0.5)).unwrap();
        let zero = ScanState::zeros(vars, 3, 3);
        let (x1, x2) = (random_series(vars, steps, &mut rng), random_series(vars, steps, &mut rng));
        let (a, b) = (rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0));

        // Superposition holds for the linear poolings.
        let agg = AggregatorSpec::of_kind([AggregatorKind::Mean, AggregatorKind::Sum][k % 2], 3);
        let run = |x: &MultivariateSeries| vi_forward(&sys, &agg, x, &zero, &ScanOptions::default()).unwrap().y;
        let (y1, y2) = (run(&x1), run(&x2));
        let y12 = run(&x1.scaled_add(a, &x2, b));
        let scale = 1.0 + y1.as_slice().iter().chain(y2.as_slice()).fold(0.0f64, |m, v| m.max(v.abs()));
        for c in 0..vars {
            for t in 0..steps {
                let want = a * y1.get(c, t) + b * y2.get(c, t);
                worst = worst.max((y12.get(c, t) - want).abs() / scale);
            }
        }

        // Visiting order within a step never changes a bit, for every pooling.
        let init = random_state(vars, 3, 3, &mut rng);
        let agg = AggregatorSpec::of_kind(AGGREGATORS[k % 3], 3);
        let by = |schedule| vi_forward(&sys, &agg, &x1, &init, &ScanOptions { schedule, ..Default::default() }).unwrap();
        let reference = by(Schedule::Ascending);
        if [Schedule::Descending, Schedule::Parallel].into_iter().all(|s| by(s) == reference) {
            schedules_equal += 1;
        }
    }
    outcome(
        worst < LINEARITY_TOL && schedules_equal == 100,
        format!("superposition error {worst:.2e} (tol {LINEARITY_TOL:e}); schedule-identical {schedules_equal}/100"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("coupling completeness", c1_coupling_completeness),
        ("mode spectrum", c2_mode_spectrum),
        ("stability certificate", c3_stability_certificate),
        ("ZOH vs RK4", c4_zoh_vs_rk4),
        ("recurrence vs convolution", c5_recurrence_vs_convolution),
        ("permutation equivariance", c6_equivariance),
        ("permutation-robustness study", c7_permutation_study),
        ("C-scaling", c8_cscaling),
        ("accuracy vs persistence", c9_accuracy_vs_persistence),
        ("spectral branch", c10_spectral),
        ("linearity and schedules", c11_linearity_and_schedules),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let n = i + 1;
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            outcome(false, format!("panicked: {}", msg.unwrap_or_default()))
        });
        let tag = if result.pass { "PASS" } else { "FAIL" };
        println!("criterion {n:>2} {tag} {name}: {}", result.detail);
        if !result.pass {
            failed.push(n);
        }
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed.len(), criteria.len());
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
