use std::f64::consts::PI;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use specflow_core::gallery::{random_hermitian, random_smooth, twisted_fd, twisted_fourier_path};
use specflow_core::{
    contour_projection, sfl_crossings, sfl_partition, sfl_tracking, ContourDescriptor, CrossingOptions, SflOptions,
};

fn eigensolver(c: &mut Criterion) {
    let mut group = c.benchmark_group("eigh");
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in [8usize, 32, 128] {
        let t = random_hermitian(n, &mut rng);
        group.bench_with_input(BenchmarkId::new("dense", n), &t, |b, t| b.iter(|| black_box(t.eigh().unwrap())));
    }
    for n in [64usize, 200] {
        let t = twisted_fd(n, 0.3).unwrap();
        group.bench_with_input(BenchmarkId::new("twisted_fd_eigh", n), &t, |b, t| {
            b.iter(|| black_box(t.eigh().unwrap()))
        });
    }
    group.finish();
}

fn projection(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let t = random_hermitian(32, &mut rng);
    let contour = ContourDescriptor::for_window(-0.5, 0.5).unwrap();
    c.bench_function("contour_projection_32", |b| b.iter(|| black_box(contour_projection(&t, &contour))));
}

fn spectral_flow(c: &mut Criterion) {
    let mut group = c.benchmark_group("sfl");
    group.sample_size(10);
    let opts = SflOptions::default();
    let copts = CrossingOptions::default();
    let fourier = twisted_fourier_path(5, -PI, PI).unwrap();
    let smooth = random_smooth(6, 3, 4).unwrap();
    for (name, path) in [("fourier_k5", &fourier), ("random_smooth_6", &smooth)] {
        group.bench_function(BenchmarkId::new("partition", name), |b| {
            b.iter(|| black_box(sfl_partition(path, &opts).unwrap().value))
        });
        group.bench_function(BenchmarkId::new("tracking", name), |b| {
            b.iter(|| black_box(sfl_tracking(path, &opts).unwrap().value))
        });
    }
    group.bench_function(BenchmarkId::new("crossings", "fourier_k5"), |b| {
        b.iter(|| black_box(sfl_crossings(&fourier, &copts).unwrap().value))
    });
    group.finish();
}

criterion_group!(benches, eigensolver, projection, spectral_flow);
criterion_main!(benches);
