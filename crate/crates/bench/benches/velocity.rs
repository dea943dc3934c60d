use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hk_bench::irregular_ensemble;
use hk_core::{step_midpoint, velocity_fast, velocity_naive, KernelParams};
use std::hint::black_box;

fn velocity(c: &mut Criterion) {
    let p = KernelParams::default();
    let mut group = c.benchmark_group("velocity");
    for n in [100usize, 1_000, 10_000] {
        let ens = irregular_ensemble(n);
        group.bench_with_input(BenchmarkId::new("fast", n), &ens, |b, e| {
            b.iter(|| velocity_fast(black_box(e), &p))
        });
        group.bench_with_input(BenchmarkId::new("naive", n), &ens, |b, e| {
            b.iter(|| velocity_naive(black_box(e), &p))
        });
    }
    group.finish();
}

fn midpoint_step(c: &mut Criterion) {
    let p = KernelParams::default();
    let ens = irregular_ensemble(1_599);
    c.bench_function("step_midpoint/1599", |b| {
        b.iter(|| step_midpoint(black_box(&ens), 0.0125, &p).unwrap())
    });
}

criterion_group!(benches, velocity, midpoint_step);
criterion_main!(benches);
