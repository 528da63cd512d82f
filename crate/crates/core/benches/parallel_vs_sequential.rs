//! Single-worker versus ambient-pool timings of the data-parallel kernels.
//!
//! `cargo bench` compares one rayon worker with the default pool; build with
//! `--no-default-features` to time the sequential backend on the same inputs.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use levykac::montecarlo::{feynman_kac, PathConfig};
use levykac::par;
use levykac::spectral::{build_operator, lowest_eigenpairs};
use levykac::{Grid, LevyModel, Potential};
use std::hint::black_box;

fn backends() -> [(&'static str, Option<usize>); 2] {
    let ambient = if par::is_parallel() { "pool" } else { "sequential" };
    [("one-worker", Some(1)), (ambient, None)]
}

fn monte_carlo(c: &mut Criterion) {
    let model = LevyModel::stable(1.0, 1).unwrap();
    let v = Potential::power(1.0, 2.0);
    let mut group = c.benchmark_group("feynman_kac");
    group.sample_size(10);
    for (name, workers) in backends() {
        let cfg = PathConfig { dt: 1e-2, n_paths: 4000, workers, ..PathConfig::default() };
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| feynman_kac(&model, &v, 1.0, black_box(&[0.5]), &cfg).unwrap())
        });
    }
    group.finish();
}

fn spectrum(c: &mut Criterion) {
    let model = LevyModel::stable(1.0, 1).unwrap();
    let v = Potential::power(1.0, 2.0);
    let op = build_operator(&model, &v, &Grid::one_d(20.0, 1024).unwrap()).unwrap();
    let spec = lowest_eigenpairs(&op, 4, 1e-9).unwrap();
    let mut group = c.benchmark_group("spectral");
    group.sample_size(10);
    for (name, workers) in backends() {
        group.bench_function(BenchmarkId::new("lanczos", name), |b| {
            b.iter(|| par::with_workers(workers, || lowest_eigenpairs(black_box(&op), 4, 1e-9).unwrap()))
        });
        group.bench_function(BenchmarkId::new("propagate", name), |b| {
            b.iter(|| par::with_workers(workers, || op.propagate_many(&[0.5, 1.0, 2.0], black_box(spec.phi0()))))
        });
    }
    group.finish();
}

criterion_group!(benches, monte_carlo, spectrum);
criterion_main!(benches);
