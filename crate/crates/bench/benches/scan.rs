use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use vissm::aggregation::{AggregatorKind, AggregatorSpec};
use vissm::scan::{ordered_forward, shrink_global_coupling, vi_forward, FeatureSource, OrderedSystem, ScanOptions, ScanState, ScanSystem, Schedule};
use vissm::ssm::{ContinuousSystem, SystemDims};
use vissm::{MultivariateSeries, Rng};

const STEPS: usize = 256;
const DELTA: f64 = 0.1;

fn engines(c: &mut Criterion) {
    let mut rng = Rng::new(1);
    let base = ContinuousSystem::random(SystemDims::DEFAULT, &mut rng);
    let ordered = OrderedSystem::from_continuous(&base, DELTA).unwrap();
    let mut group = c.benchmark_group("forward");
    group.sample_size(20);
    for vars in [16, 64, 256] {
        let (cont, _) =
            shrink_global_coupling(&base, DELTA, AggregatorKind::Mean, vars, FeatureSource::HorizontalAndInput, 0.98).unwrap();
        let vi = ScanSystem::new(&cont, DELTA).unwrap();
        let x = MultivariateSeries::from_fn(vars, STEPS, |_, _| rng.normal());
        let init = ScanState::zeros(vars, 8, 8);
        let agg = AggregatorSpec::mean();
        group.throughput(Throughput::Elements((vars * STEPS) as u64));
        for (label, schedule) in [("vi_parallel", Schedule::Parallel), ("vi_ascending", Schedule::Ascending)] {
            let opts = ScanOptions { schedule, ..Default::default() };
            group.bench_with_input(BenchmarkId::new(label, vars), &x, |b, x| {
                b.iter(|| vi_forward(&vi, &agg, x, &init, &opts).unwrap())
            });
        }
        group.bench_with_input(BenchmarkId::new("ordered", vars), &x, |b, x| {
            b.iter(|| ordered_forward(&ordered, x, &init).unwrap())
        });
    }
    group.finish();
}

fn aggregators(c: &mut Criterion) {
    let mut rng = Rng::new(2);
    let vars = 64;
    let mut cont = ContinuousSystem::random(SystemDims::DEFAULT, &mut rng);
    cont.scale_global_coupling(0.1);
    let vi = ScanSystem::new(&cont, DELTA).unwrap();
    let x = MultivariateSeries::from_fn(vars, STEPS, |_, _| rng.normal());
    let init = ScanState::zeros(vars, 8, 8);
    let mut group = c.benchmark_group("pooling");
    group.sample_size(20);
    for kind in [AggregatorKind::Mean, AggregatorKind::Sum, AggregatorKind::Attention] {
        let agg = AggregatorSpec::of_kind(kind, 8);
        group.bench_function(kind.name(), |b| b.iter(|| vi_forward(&vi, &agg, &x, &init, &ScanOptions::default()).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, engines, aggregators);
criterion_main!(benches);
