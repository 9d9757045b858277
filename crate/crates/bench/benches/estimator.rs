use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use hessfit_bench::sphere_fixture;
use hessfit_core::moments::{truncated_c, CPattern};
use hessfit_core::{epsilon_neighbors, estimate_at, GridIndex};

fn estimator(c: &mut Criterion) {
    let (cloud, fvals) = sphere_fixture(100_000, 1);
    let z = cloud.point(0).to_vec();
    c.bench_function("estimate_at/sphere/n=1e5/eps=0.2", |b| {
        b.iter(|| estimate_at(&cloud, &fvals, black_box(&z), 0.2, 2).unwrap())
    });
}

fn neighbors(c: &mut Criterion) {
    let (cloud, _) = sphere_fixture(100_000, 2);
    let z = cloud.point(7).to_vec();
    let grid = GridIndex::new(&cloud, 0.2);
    let mut group = c.benchmark_group("neighbors/eps=0.2");
    group.bench_function("brute_force", |b| b.iter(|| epsilon_neighbors(&cloud, black_box(&z), 0.2)));
    group.bench_function("grid", |b| b.iter(|| grid.query(&cloud, black_box(&z), 0.2)));
    group.finish();
}

fn truncated(c: &mut Criterion) {
    c.bench_function("truncated_c/d=3/delta=0.5/C_2,2", |b| {
        b.iter(|| truncated_c(3, black_box(0.5), CPattern::standard(2, 2)).unwrap())
    });
}

criterion_group!(benches, estimator, neighbors, truncated);
criterion_main!(benches);
