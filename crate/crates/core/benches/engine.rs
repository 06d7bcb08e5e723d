use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use vpf_core::engine::system::SystemMatrix;
use vpf_core::engine::{ehrhart, symbolic, EngineOptions};
use vpf_core::Parallelism;

fn options(mode: Parallelism) -> EngineOptions {
    EngineOptions { parallelism: mode, ..Default::default() }
}

fn bench_symbolic(c: &mut Criterion) {
    let systems = [
        ("2x4", SystemMatrix::new(vec![vec![1, 2, 1, 0], vec![1, 1, 0, 1]]).unwrap()),
        ("3x5", SystemMatrix::new(vec![vec![1, 1, 1, 0, 0], vec![0, 1, 2, 1, 0], vec![1, 0, 1, 1, 1]]).unwrap()),
    ];
    let mut group = c.benchmark_group("symbolic");
    group.sample_size(10);
    for (name, a) in &systems {
        for mode in [Parallelism::Sequential, Parallelism::Parallel] {
            group.bench_with_input(BenchmarkId::new(format!("{mode:?}"), name), a, |bch, a| {
                bch.iter(|| symbolic(a, &options(mode)).unwrap())
            });
        }
    }
    group.finish();
}

fn bench_ehrhart(c: &mut Criterion) {
    let a = SystemMatrix::new(vec![vec![1, 2, 1, 0], vec![1, 1, 0, 1]]).unwrap();
    let mut group = c.benchmark_group("ehrhart");
    group.sample_size(10);
    for mode in [Parallelism::Sequential, Parallelism::Parallel] {
        group.bench_function(format!("{mode:?}"), |bch| bch.iter(|| ehrhart(&a, &[5, 4], &options(mode)).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, bench_symbolic, bench_ehrhart);
criterion_main!(benches);
