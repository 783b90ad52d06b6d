use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use vissm::numerics::{canonical_sum, mat_exp, rdft, spectral_radius};
use vissm::ssm::{discretize_zoh, ContinuousSystem, SystemDims};
use vissm::{Matrix, Rng};

fn matrix_functions(c: &mut Criterion) {
    let mut rng = Rng::new(3);
    let mut group = c.benchmark_group("matrix");
    for n in [8, 16, 32] {
        let a = Matrix::from_fn(n, n, |_, _| rng.normal() / (n as f64).sqrt());
        group.bench_with_input(BenchmarkId::new("mat_exp", n), &a, |b, a| b.iter(|| mat_exp(a).unwrap()));
        group.bench_with_input(BenchmarkId::new("spectral_radius", n), &a, |b, a| b.iter(|| spectral_radius(a).unwrap()));
    }
    let sys = ContinuousSystem::random(SystemDims::DEFAULT, &mut rng);
    group.bench_function("discretize_zoh_default", |b| b.iter(|| discretize_zoh(&sys, black_box(0.5)).unwrap()));
    group.finish();
}

fn reductions(c: &mut Criterion) {
    let mut rng = Rng::new(4);
    let mut group = c.benchmark_group("reduce");
    for n in [16, 256, 4096] {
        let v: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
        group.bench_with_input(BenchmarkId::new("canonical_sum", n), &v, |b, v| {
            b.iter_batched_ref(|| v.clone(), |w| canonical_sum(w), criterion::BatchSize::SmallInput)
        });
        group.bench_with_input(BenchmarkId::new("rdft", n), &v, |b, v| b.iter(|| rdft(v).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, matrix_functions, reductions);
criterion_main!(benches);
