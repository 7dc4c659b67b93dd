use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use steadyprice_bench::random_table;
use steadyprice_core::linear_pricing::linear_pricing;
use steadyprice_core::nnls::{nnls_solve, DEFAULT_TOLERANCE};
use steadyprice_core::waterfill::waterlevel_pricing;

fn waterlevel(c: &mut Criterion) {
    let mut group = c.benchmark_group("waterlevel_pricing");
    group.sample_size(10);
    for n in [10_000usize, 100_000, 1_000_000] {
        let table = random_table(n, 1, 42);
        group.bench_with_input(BenchmarkId::from_parameter(n), &table, |b, t| {
            b.iter(|| waterlevel_pricing(black_box(t)).unwrap())
        });
    }
    group.finish();
}

fn linear(c: &mut Criterion) {
    let mut group = c.benchmark_group("linear_pricing");
    group.sample_size(10);
    for (n, m) in [(100usize, 2usize), (10_000, 5)] {
        let table = random_table(n, m, 7);
        group.bench_with_input(BenchmarkId::new(format!("m{m}"), n), &table, |b, t| {
            b.iter(|| linear_pricing(black_box(t)).unwrap())
        });
    }
    group.finish();
}

fn nnls(c: &mut Criterion) {
    let table = random_table(1_000, 5, 3);
    let mu = table.fair_mean_profit();
    let problem = steadyprice_core::linear_pricing::build_ls_problem(&table, mu, 1.0).unwrap();
    c.bench_function("nnls_solve/1001x6", |b| {
        b.iter(|| nnls_solve(black_box(&problem), DEFAULT_TOLERANCE, None).unwrap())
    });
}

criterion_group!(benches, waterlevel, linear, nnls);
criterion_main!(benches);
