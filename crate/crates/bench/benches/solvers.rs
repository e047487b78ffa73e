use brachisto_core::annulus::solve_constrained;
use brachisto_core::field::value_grid;
use brachisto_core::oracle::{oracle_min_time, GridGraph, Stencil};
use brachisto_core::strong::{shoot, tof_strong};
use brachisto_core::PolarPoint;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::f64::consts::PI;
use std::hint::black_box;

fn strong(c: &mut Criterion) {
    c.bench_function("shoot", |b| b.iter(|| shoot(black_box(1.3)).unwrap()));
    let sol = shoot(1.3).unwrap();
    c.bench_function("tof_strong", |b| b.iter(|| tof_strong(black_box(&sol)).unwrap()));
}

fn annulus(c: &mut Criterion) {
    let target = PolarPoint::new(1.0, 2.0 * PI / 3.0).unwrap();
    c.bench_function("solve_constrained", |b| b.iter(|| solve_constrained(0.5, black_box(target)).unwrap()));
}

fn oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("oracle");
    group.sample_size(10);
    let target = PolarPoint::new(1.0, PI / 3.0).unwrap();
    for n_r in [50, 100] {
        group.bench_with_input(BenchmarkId::from_parameter(n_r), &n_r, |b, &n_r| {
            b.iter(|| {
                let g = GridGraph::with_stencil(n_r, 2 * n_r, 0.0, Stencil::refinement(1)).unwrap();
                oracle_min_time(&g, target).unwrap()
            })
        });
    }
    group.finish();
}

fn field(c: &mut Criterion) {
    let mut group = c.benchmark_group("value_grid");
    group.sample_size(10);
    for eps in [0.0, 0.5] {
        group.bench_with_input(BenchmarkId::from_parameter(eps), &eps, |b, &eps| {
            b.iter(|| value_grid(eps, 100, 200, 128).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, strong, annulus, oracle, field);
criterion_main!(benches);
