use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{run_pipeline, simulate_instance, PipelineSystems, Predictor, StudyConfig};
use crate::error::{domain_err, Result};
use crate::numerics::Rng;

pub const CSCALING_VALUES: [usize; 5] = [16, 32, 64, 128, 256];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub engine: Predictor,
    pub vars: usize,
    pub mae: f64,
    pub mape: f64,
    pub mse: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    /// Sample standard deviation; zero for a single trial.
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub engine: Predictor,
    pub vars: usize,
    pub trials: usize,
    pub mae: Summary,
    pub mape: Summary,
    pub mse: Summary,
    #[serde(skip)]
    pub median_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyReport {
    pub study: String,
    pub seed: u64,
    pub config: StudyConfig,
    pub aggregates: Vec<Aggregate>,
    #[serde(skip)]
    pub records: Vec<TrialRecord>,
}

/// Mean and sample std, computed on offsets from the first value so identical inputs give
/// a std of exactly zero.
pub fn summarize(values: &[f64]) -> Summary {
    let Some(&first) = values.first() else {
        return Summary { mean: 0.0, std: 0.0 };
    };
    let n = values.len() as f64;
    let offsets: Vec<f64> = values.iter().map(|v| v - first).collect();
    let shift = offsets.iter().sum::<f64>() / n;
    let std = if values.len() < 2 {
        0.0
    } else {
        (offsets.iter().map(|d| (d - shift).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    Summary { mean: first + shift, std }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

impl StudyReport {
    fn new(study: &str, seed: u64, config: StudyConfig, records: Vec<TrialRecord>) -> Self {
        let mut groups: BTreeMap<(usize, Predictor), Vec<&TrialRecord>> = BTreeMap::new();
        for r in &records {
            groups.entry((r.vars, r.engine)).or_default().push(r);
        }
        let aggregates = groups
            .into_iter()
            .map(|((vars, engine), rows)| {
                let pick = |f: fn(&TrialRecord) -> f64| rows.iter().map(|r| f(r)).collect::<Vec<_>>();
                Aggregate {
                    engine,
                    vars,
                    trials: rows.len(),
                    mae: summarize(&pick(|r| r.mae)),
                    mape: summarize(&pick(|r| r.mape)),
                    mse: summarize(&pick(|r| r.mse)),
                    median_seconds: median(pick(|r| r.seconds)),
                }
            })
            .collect();
        Self { study: study.to_owned(), seed, config, aggregates, records }
    }

    pub fn aggregate(&self, engine: Predictor, vars: usize) -> Option<&Aggregate> {
        self.aggregates.iter().find(|a| a.engine == engine && a.vars == vars)
    }

    pub fn records_for(&self, engine: Predictor) -> impl Iterator<Item = &TrialRecord> {
        self.records.iter().filter(move |r| r.engine == engine)
    }

    /// One row per trial and engine, including timings.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.records {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| crate::Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| crate::Error::Io(e.to_string()))
    }

    /// Configuration and per-engine summaries without wall-clock fields.
    pub fn to_json_summary(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| crate::Error::Io(e.to_string()))
    }
}

/// Fits and evaluates every predictor on `trials` random variable orderings of one dataset.
pub fn run_permutation_study(cfg: &StudyConfig, trials: usize, rng: &mut Rng) -> Result<StudyReport> {
    cfg.validate()?;
    if trials < 2 {
        return domain_err(format!("permutation study needs at least 2 trials, got {trials}"));
    }
    let seed = rng.seed();
    let (x, template) = simulate_instance(cfg, cfg.vars, rng)?;
    let systems = PipelineSystems::new(&template, cfg, cfg.vars)?;
    let mut records = Vec::with_capacity(trials * Predictor::ALL.len());
    for trial in 0..trials {
        let perm = rng.split().permutation(cfg.vars);
        let xp = x.permute_vars(&perm)?;
        for engine in Predictor::ALL {
            let r = run_pipeline(engine, &systems, cfg, &xp)?;
            records.push(TrialRecord {
                trial,
                engine,
                vars: cfg.vars,
                mae: r.metrics.mae,
                mape: r.metrics.mape,
                mse: r.metrics.mse,
                seconds: r.seconds,
            });
        }
    }
    Ok(StudyReport::new("permutation", seed, cfg.clone(), records))
}

/// Regenerates data for each variable count and evaluates every predictor once.
pub fn run_cscaling_study(c_values: &[usize], cfg: &StudyConfig, rng: &mut Rng) -> Result<StudyReport> {
    if c_values.is_empty() {
        return domain_err("C-scaling study needs at least one variable count");
    }
    if let Some(bad) = c_values.iter().find(|c| !CSCALING_VALUES.contains(c)) {
        return domain_err(format!("variable count {bad} not in {CSCALING_VALUES:?}"));
    }
    for &vars in c_values {
        StudyConfig { vars, ..cfg.clone() }.validate()?;
    }
    let seed = rng.seed();
    let mut records = Vec::new();
    for (trial, &vars) in c_values.iter().enumerate() {
        let local = StudyConfig { vars, ..cfg.clone() };
        let (x, template) = simulate_instance(&local, vars, &mut rng.split())?;
        let systems = PipelineSystems::new(&template, &local, vars)?;
        for engine in Predictor::ALL {
            let r = run_pipeline(engine, &systems, &local, &x)?;
            records.push(TrialRecord {
                trial,
                engine,
                vars,
                mae: r.metrics.mae,
                mape: r.metrics.mape,
                mse: r.metrics.mse,
                seconds: r.seconds,
            });
        }
    }
    Ok(StudyReport::new("cscaling", seed, cfg.clone(), records))
}
