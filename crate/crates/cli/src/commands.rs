use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::json;
use vissm::aggregation::{AggregatorKind, AggregatorSpec};
use vissm::branches::BranchConfig;
use vissm::forecast::{forecast, ForecastConfig};
use vissm::scan::{depth_benchmark, Engine};
use vissm::sim::{
    run_cscaling_study, run_permutation_study, run_pipeline, simulate_instance, PipelineSystems, Predictor, StudyConfig,
    StudyReport, CSCALING_VALUES,
};
use vissm::Rng;

use crate::args::{BenchArgs, CheckArgs, ForecastArgs, SimulateArgs};
use crate::check::{run_suite, CheckOptions, DEFAULT_CASES, SUITES};
use crate::config::{parse_list, usage, FileConfig};
use crate::csv_io::{format_series, load_series};
use crate::error::{CliError, CliResult};

const DEFAULT_SEED: u64 = 0;

/// Where results go: files in a directory, or stdout.
struct Sink {
    dir: Option<PathBuf>,
}

impl Sink {
    fn new(dir: Option<PathBuf>) -> CliResult<Self> {
        if let Some(d) = &dir {
            std::fs::create_dir_all(d).map_err(|e| CliError::Io(format!("{}: {e}", d.display())))?;
        }
        Ok(Self { dir })
    }

    /// Writes `name` into the output directory, or prints it when there is none.
    fn emit(&self, name: &str, content: &str) -> CliResult<()> {
        match &self.dir {
            Some(d) => write_file(&d.join(name), content),
            None => {
                print!("{content}");
                if !content.ends_with('\n') {
                    println!();
                }
                Ok(())
            }
        }
    }
}

fn write_file(path: &Path, content: &str) -> CliResult<()> {
    std::fs::write(path, content).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn parse_agg(raw: &str) -> CliResult<AggregatorKind> {
    raw.parse().map_err(|e: vissm::Error| CliError::Usage(e.to_string()))
}

fn validated<T>(r: vissm::Result<T>) -> CliResult<T> {
    r.map_err(|e| CliError::Usage(e.to_string()))
}

pub fn check(args: CheckArgs) -> CliResult<()> {
    let file = FileConfig::load(args.common.config.as_deref())?;
    let seed = file.pick(args.common.seed, "seed", DEFAULT_SEED)?;
    let cases = file.pick(args.cases, "cases", DEFAULT_CASES)?;
    let break_coupling = args.break_coupling || file.pick(None, "break_coupling", false)?;
    let out = file.pick_opt(args.common.out, "out")?;
    let suites: Vec<String> = match file.pick_opt(args.suites, "suites")? {
        None => SUITES.iter().map(|s| s.to_string()).collect(),
        Some(raw) => raw.split(',').map(|s| s.trim().to_owned()).filter(|s| !s.is_empty()).collect(),
    };
    if let Some(bad) = suites.iter().find(|s| !SUITES.contains(&s.as_str())) {
        return usage(format!("unknown suite `{bad}` (known: {})", SUITES.join(", ")));
    }
    if suites.is_empty() || cases == 0 {
        return usage("nothing to check");
    }
    let opts = CheckOptions { seed, cases, break_coupling };
    let sink = Sink::new(out)?;

    let mut report = String::new();
    let mut failures = Vec::new();
    for name in &suites {
        let outcome = run_suite(name, &opts)?;
        let status = if outcome.ok() { "pass" } else { "FAIL" };
        let line = format!("{:<13} {status} {}/{}", outcome.name, outcome.passed, outcome.cases);
        println!("{line}");
        let _ = writeln!(report, "{line}");
        if let Some(cx) = &outcome.counterexample {
            let text = serde_json::to_string(cx).unwrap_or_default();
            println!("  counterexample: {text}");
            let _ = writeln!(report, "  counterexample: {text}");
            failures.push(outcome.name);
        }
    }
    if sink.dir.is_some() {
        sink.emit("check.txt", &report)?;
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failure(format!("failing suites: {}", failures.join(", "))))
    }
}

pub fn bench(args: BenchArgs) -> CliResult<()> {
    let file = FileConfig::load(args.common.config.as_deref())?;
    let seed = file.pick(args.common.seed, "seed", DEFAULT_SEED)?;
    let vars = match file.pick_opt(args.vars, "vars")? {
        Some(raw) => parse_list(&raw, "--vars")?,
        None => CSCALING_VALUES.to_vec(),
    };
    let steps = file.pick(args.seq, "seq", 256)?;
    let repeats = file.pick(args.repeats, "repeats", 5)?;
    let agg = parse_agg(&file.pick(args.agg, "agg", "mean".to_owned())?)?;
    let out = file.pick_opt(args.common.out, "out")?;
    if repeats == 0 {
        return usage("--repeats must be positive");
    }
    let configs: Vec<StudyConfig> = vars
        .iter()
        .map(|&v| StudyConfig { vars: v, steps, agg, timing_repeats: 1, ..Default::default() })
        .collect();
    for cfg in &configs {
        validated(cfg.validate())?;
    }
    let sink = Sink::new(out)?;

    let timings = depth_benchmark(&vars, steps, repeats, seed)?;
    let mut rng = Rng::new(seed);
    let mut csv = String::from("engine,C,median_seconds,mae,mape\n");
    for cfg in &configs {
        let (x, template) = simulate_instance(cfg, cfg.vars, &mut rng.split())?;
        let systems = PipelineSystems::new(&template, cfg, cfg.vars)?;
        for (engine, predictor) in [(Engine::Vi, Predictor::Vi), (Engine::Ordered, Predictor::Ordered)] {
            let metrics = run_pipeline(predictor, &systems, cfg, &x)?.metrics;
            let seconds = timings
                .iter()
                .find(|r| r.engine == engine && r.vars == cfg.vars)
                .map_or(f64::NAN, |r| r.seconds);
            let _ = writeln!(csv, "{},{},{},{},{}", engine.name(), cfg.vars, seconds, metrics.mae, metrics.mape);
        }
    }
    sink.emit("bench.csv", &csv)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Study {
    Permutation,
    Cscaling,
    Both,
}

pub fn simulate(args: SimulateArgs) -> CliResult<()> {
    let file = FileConfig::load(args.common.config.as_deref())?;
    let seed = file.pick(args.common.seed, "seed", DEFAULT_SEED)?;
    let study = match file.pick(args.study, "study", "permutation".to_owned())?.as_str() {
        "permutation" => Study::Permutation,
        "cscaling" => Study::Cscaling,
        "both" => Study::Both,
        other => return usage(format!("unknown study `{other}` (permutation, cscaling, both)")),
    };
    let vars = file.pick_opt(args.vars, "vars")?.map(|raw| parse_list(&raw, "--vars")).transpose()?;
    let steps = file.pick(args.seq, "seq", 1000)?;
    let trials = file.pick(args.trials, "trials", 10)?;
    let agg = parse_agg(&file.pick(args.agg, "agg", "mean".to_owned())?)?;
    let out = file.pick_opt(args.common.out, "out")?;

    let base = StudyConfig { steps, agg, ..Default::default() };
    let perm_vars = vars.clone().unwrap_or_else(|| vec![base.vars]);
    let scaling_vars = vars.unwrap_or_else(|| CSCALING_VALUES.to_vec());
    let run_perm = study != Study::Cscaling;
    let run_scaling = study != Study::Permutation;
    if run_perm {
        if trials < 2 {
            return usage("--trials must be at least 2");
        }
        for &v in &perm_vars {
            validated(StudyConfig { vars: v, ..base.clone() }.validate())?;
        }
    }
    if run_scaling {
        if let Some(bad) = scaling_vars.iter().find(|c| !CSCALING_VALUES.contains(c)) {
            return usage(format!("C-scaling variable count {bad} not in {CSCALING_VALUES:?}"));
        }
        for &v in &scaling_vars {
            validated(StudyConfig { vars: v, ..base.clone() }.validate())?;
        }
    }
    let sink = Sink::new(out)?;

    let mut rng = Rng::new(seed);
    let mut reports: Vec<(String, StudyReport)> = Vec::new();
    if run_perm {
        for &v in &perm_vars {
            let cfg = StudyConfig { vars: v, ..base.clone() };
            reports.push((format!("permutation_C{v}"), run_permutation_study(&cfg, trials, &mut rng.split())?));
        }
    }
    if run_scaling {
        reports.push(("cscaling".to_owned(), run_cscaling_study(&scaling_vars, &base, &mut rng.split())?));
    }
    for (stem, report) in &reports {
        if sink.dir.is_some() {
            sink.emit(&format!("{stem}.csv"), &report.to_csv()?)?;
            sink.emit(&format!("{stem}.json"), &report.to_json_summary()?)?;
            for a in &report.aggregates {
                println!(
                    "{stem} {:<11} C={:<4} mae {:.6} ± {:.2e}  mse {:.6}",
                    a.engine.name(),
                    a.vars,
                    a.mae.mean,
                    a.mae.std,
                    a.mse.mean
                );
            }
        } else {
            sink.emit(stem, &report.to_json_summary()?)?;
        }
    }
    Ok(())
}

pub fn run_forecast(args: ForecastArgs) -> CliResult<()> {
    let file = FileConfig::load(args.common.config.as_deref())?;
    let seed = file.pick(args.common.seed, "seed", DEFAULT_SEED)?;
    let defaults = ForecastConfig::default();
    let b = &defaults.branches;
    let Some(input) = file.pick_opt(args.input, "input")? else {
        return usage("forecast needs --input <file.csv>");
    };
    let agg = parse_agg(&file.pick(args.agg, "agg", "mean".to_owned())?)?;
    let dims = defaults.dims;
    let cfg = ForecastConfig {
        branches: BranchConfig {
            delta_long: file.pick(args.delta_long, "delta_long", b.delta_long)?,
            delta_short: file.pick(args.delta_short, "delta_short", b.delta_short)?,
            delta_freq: file.pick(args.delta_freq, "delta_freq", b.delta_freq)?,
            agg: AggregatorSpec::of_kind(agg, dims.d_psi),
            scan: b.scan,
        },
        window: file.pick(args.window, "window", defaults.window)?,
        lambda: file.pick(None, "lambda", defaults.lambda)?,
        seed,
        ..defaults
    };
    validated(cfg.validate())?;
    let out = file.pick_opt(args.common.out, "out")?;
    let data = load_series(&input)?;
    let result = forecast(&cfg, &data.series)?;
    let sink = Sink::new(out)?;

    let metrics = json!({
        "input": input.display().to_string(),
        "vars": data.series.vars(),
        "steps": data.series.steps(),
        "first_target": result.first_target,
        "model": result.metrics,
        "persistence": result.persistence,
    });
    let metrics_text = serde_json::to_string_pretty(&metrics).map_err(|e| CliError::Failure(e.to_string()))?;
    let csv = format_series(&data.names, &result.predictions, result.first_target);
    sink.emit("predictions.csv", &csv)?;
    if sink.dir.is_some() {
        sink.emit("metrics.json", &metrics_text)?;
        println!(
            "mae {:.6}  mse {:.6}  (persistence mae {:.6}  mse {:.6})",
            result.metrics.mae, result.metrics.mse, result.persistence.mae, result.persistence.mse
        );
    } else {
        eprintln!("{metrics_text}");
    }
    Ok(())
}
