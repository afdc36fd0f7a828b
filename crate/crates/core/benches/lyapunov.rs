use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use zipper_lab::exec::Execution;
use zipper_lab::haar::SeedSpec;
use zipper_lab::linalg::{CMat, C64};
use zipper_lab::lyapunov::{lyapunov_spectrum, roots_of_unity, sweep, LyapunovConfig};
use zipper_lab::spectral::localization_contrast;
use zipper_lab::zipper::{make_verblunsky, scalar_alpha};

fn spectrum(c: &mut Criterion) {
    let mut group = c.benchmark_group("lyapunov_spectrum");
    group.sample_size(10);
    for l in [1usize, 2, 3] {
        let vd = make_verblunsky(scalar_alpha(l, 0.5)).unwrap();
        for exec in [Execution::Sequential, Execution::Parallel] {
            let cfg = LyapunovConfig::new(2_000, 16).with_execution(exec);
            group.bench_with_input(BenchmarkId::new(format!("{exec:?}"), l), &l, |b, _| {
                b.iter(|| lyapunov_spectrum(&vd, black_box(C64::new(0.0, 1.0)), &cfg, SeedSpec::new(7)).unwrap())
            });
        }
    }
    group.finish();
}

fn z_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("sweep_8_roots");
    group.sample_size(10);
    let vd = make_verblunsky(scalar_alpha(2, 0.5)).unwrap();
    let grid = roots_of_unity(8);
    for exec in [Execution::Sequential, Execution::Parallel] {
        let cfg = LyapunovConfig::new(1_000, 4).with_execution(exec);
        group.bench_function(format!("{exec:?}"), |b| {
            b.iter(|| sweep(&vd, black_box(&grid), &cfg, 11).unwrap())
        });
    }
    group.finish();
}

fn contrast(c: &mut Criterion) {
    let mut group = c.benchmark_group("localization_contrast");
    group.sample_size(10);
    let vd0 = make_verblunsky(CMat::zeros(1, 1)).unwrap();
    let vd = make_verblunsky(scalar_alpha(1, 0.5)).unwrap();
    for exec in [Execution::Sequential, Execution::Parallel] {
        group.bench_function(format!("{exec:?}"), |b| {
            b.iter(|| localization_contrast(&vd0, &vd, 100, 8, SeedSpec::new(3), exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, spectrum, z_sweep, contrast);
criterion_main!(benches);
