//! Single-thread pool against the default pool on the data-parallel kernels.
//! Build with `--no-default-features` to time the sequential fallback instead.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use kcolour::exact::{expected_z2, Z2Restriction};
use kcolour::graph::ModelParams;
use kcolour::harness::{run, ExperimentConfig, ExperimentKind};
use kcolour::limit_law::{sample_w_batch, Truncation, WConfig};
use kcolour::par;

fn pools() -> Vec<(&'static str, usize)> {
    let all = std::thread::available_parallelism().map_or(1, |n| n.get());
    vec![("1-thread", 1), ("default", all)]
}

fn kernels(c: &mut Criterion) {
    let wconfig = WConfig::new(2.0, 3, Truncation::Adaptive(1e-6)).unwrap();
    let params = ModelParams::new(3, 14, 2.0).unwrap();
    let mut mc = ExperimentConfig::preset(ExperimentKind::ExpectationCheck);
    mc.samples = 2000;

    let mut group = c.benchmark_group("kernels");
    group.sample_size(10);
    for (name, threads) in pools() {
        group.bench_with_input(BenchmarkId::new("w_batch_1e5", name), &threads, |b, &t| {
            b.iter(|| par::with_threads(t, || black_box(sample_w_batch(&wconfig, 100_000, 1).unwrap())))
        });
        group.bench_with_input(BenchmarkId::new("expected_z2_n14", name), &threads, |b, &t| {
            b.iter(|| par::with_threads(t, || black_box(expected_z2(&params, &Z2Restriction::all()).unwrap())))
        });
        group.bench_with_input(BenchmarkId::new("mc_count_n12", name), &threads, |b, &t| {
            b.iter(|| par::with_threads(t, || black_box(run(&mc).unwrap())))
        });
    }
    group.finish();
}

criterion_group!(benches, kernels);
criterion_main!(benches);
