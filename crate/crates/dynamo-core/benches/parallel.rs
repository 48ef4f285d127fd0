//! Compares the data-parallel FFT/solver path against a single-threaded run
//! of the same code. With the `parallel` feature enabled (the default) the
//! single-threaded baseline is obtained by running inside a one-thread rayon
//! pool; without it both benches measure the sequential fallback.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dynamo_core::solver::rhs_advect_stretch;
use dynamo_core::spectral::{forward_transform, Grid3, PhysicalField, SpectralField};
use dynamo_core::velocity::{sample_velocity, VelocityTag};
use dynamo_core::Complex;

fn test_state(n: usize) -> (SpectralField, PhysicalField) {
    let grid = Grid3::cubic(n).unwrap();
    let u = sample_velocity(VelocityTag::Abc { delta: 0.2 }, grid).unwrap();
    let mut b = SpectralField::zeros(grid);
    for (i, c) in b.coeffs.iter_mut().enumerate() {
        let x = (i as f64 * 0.618).fract() - 0.5;
        *c = Complex::new(x, -x / 2.0);
    }
    (b, u)
}

fn run_single_threaded<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        f()
    }
}

fn bench_rhs(c: &mut Criterion) {
    let mut group = c.benchmark_group("rhs_advect_stretch");
    for n in [32usize, 64] {
        let (b, u) = test_state(n);
        let limit = (n / 3) as i64;
        group.bench_with_input(BenchmarkId::new("threaded", n), &n, |bench, _| {
            bench.iter(|| rhs_advect_stretch(&b, &u, limit).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("single", n), &n, |bench, _| {
            bench.iter(|| run_single_threaded(|| rhs_advect_stretch(&b, &u, limit).unwrap()))
        });
    }
    group.finish();
}

fn bench_forward_transform(c: &mut Criterion) {
    let mut group = c.benchmark_group("forward_transform");
    for n in [32usize, 64] {
        let grid = Grid3::cubic(n).unwrap();
        let f = PhysicalField::sample(grid, |x, y, z| {
            [
                Complex::new(x.sin(), 0.0),
                Complex::new((y + z).cos(), 0.0),
                Complex::new(x * y.sin(), 0.0),
            ]
        });
        group.bench_with_input(BenchmarkId::new("threaded", n), &n, |bench, _| {
            bench.iter(|| forward_transform(&f))
        });
        group.bench_with_input(BenchmarkId::new("single", n), &n, |bench, _| {
            bench.iter(|| run_single_threaded(|| forward_transform(&f)))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_rhs, bench_forward_transform);
criterion_main!(benches);
