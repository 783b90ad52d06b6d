use std::time::Instant;

use super::{ordered_forward, shrink_global_coupling, vi_forward, FeatureSource, OrderedSystem, ScanOptions, ScanState, ScanSystem};
use crate::aggregation::{AggregatorKind, AggregatorSpec};
use crate::error::{size_err, Result};
use crate::numerics::Rng;
use crate::series::MultivariateSeries;
use crate::ssm::{ContinuousSystem, SystemDims};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Engine {
    Vi,
    Ordered,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::Vi => "vi",
            Engine::Ordered => "ordered",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimingRow {
    pub engine: Engine,
    pub vars: usize,
    /// Median wall-clock seconds per forward pass.
    pub seconds: f64,
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

fn time_it(repeats: usize, mut f: impl FnMut() -> Result<()>) -> Result<f64> {
    f()?;
    let mut samples = Vec::with_capacity(repeats);
    for _ in 0..repeats.max(1) {
        let start = Instant::now();
        f()?;
        samples.push(start.elapsed().as_secs_f64());
    }
    Ok(median(samples))
}

/// Forward-pass timing of both engines for each variable count, after one discarded warm-up.
///
/// The VI engine runs with the parallel schedule; the ordered engine is sequential by nature.
pub fn depth_benchmark(c_values: &[usize], steps: usize, repeats: usize, seed: u64) -> Result<Vec<TimingRow>> {
    if c_values.is_empty() || steps == 0 {
        return size_err("benchmark needs at least one variable count and one step");
    }
    let delta = 0.1;
    let mut rng = Rng::new(seed);
    let base = ContinuousSystem::random(SystemDims::DEFAULT, &mut rng);
    let ordered = OrderedSystem::from_continuous(&base, delta)?;
    let agg = AggregatorSpec::mean();
    let opts = ScanOptions::default();
    let mut rows = Vec::with_capacity(2 * c_values.len());
    for &vars in c_values {
        let (cont, _) = shrink_global_coupling(&base, delta, AggregatorKind::Mean, vars, FeatureSource::HorizontalAndInput, 0.98)?;
        let sys = ScanSystem::new(&cont, delta)?;
        let mut data_rng = rng.split();
        let x = MultivariateSeries::from_fn(vars, steps, |_, _| data_rng.normal());
        let init = ScanState::zeros(vars, 8, 8);
        let vi = time_it(repeats, || vi_forward(&sys, &agg, &x, &init, &opts).map(|_| ()))?;
        let ord = time_it(repeats, || ordered_forward(&ordered, &x, &init).map(|_| ()))?;
        rows.push(TimingRow { engine: Engine::Vi, vars, seconds: vi });
        rows.push(TimingRow { engine: Engine::Ordered, vars, seconds: ord });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_value_table() {
        let rows = depth_benchmark(&[4], 8, 1, 0).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].engine, Engine::Vi);
        assert_eq!(rows[1].engine, Engine::Ordered);
        assert!(rows.iter().all(|r| r.seconds >= 0.0 && r.vars == 4));
        assert!(depth_benchmark(&[], 8, 1, 0).is_err());
    }

    #[test]
    fn median_even_odd() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
