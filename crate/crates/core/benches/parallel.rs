//! Parallel (global rayon pool) versus sequential (one-thread pool) timings
//! of the data-parallel entry points.

use std::f64::consts::TAU;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use floquet_core::correlations::{correlation_map, CorrelationOptions};
use floquet_core::dynamics::DriveSpec;
use floquet_core::optimizer::{optimize_waveform, OptimizerConfig, SpectralTarget};
use floquet_core::ramsey::{contrast_sweep, RamseySweepConfig};
use floquet_core::scattering::{spectrum_map, DriveFamily, EmitterParams, SweepAxis};
use floquet_core::waveform::make_sine;

fn pools() -> Vec<(&'static str, rayon::ThreadPool)> {
    let global = rayon::ThreadPoolBuilder::new().build().unwrap();
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    vec![("parallel", global), ("sequential", single)]
}

fn bench_spectrum_map(c: &mut Criterion) {
    let e = EmitterParams::symmetric(0.0, 1.0).unwrap();
    let family = DriveFamily::sine();
    let sweep: Vec<f64> = (1..=64).map(|i| 0.25 * i as f64).collect();
    let grid: Vec<f64> = (0..=2000).map(|j| -40.0 + 0.04 * j as f64).collect();
    let mut g = c.benchmark_group("spectrum_map");
    for (name, pool) in pools() {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                pool.install(|| {
                    spectrum_map(&e, &family, SweepAxis::AmplitudeAtFixedOmega { omega: 2.0 }, &sweep, &grid).unwrap()
                })
            })
        });
    }
    g.finish();
}

fn bench_correlation_map(c: &mut Criterion) {
    let d = DriveSpec::weak_cw(make_sine(5.0, 2.5, 0.0).unwrap(), 2.5, 1e-4);
    let taus: Vec<f64> = (0..=100).map(|j| 0.05 * j as f64).collect();
    let opts = CorrelationOptions { t_samples: 16, verify_weak_drive: false, ..Default::default() };
    let mut g = c.benchmark_group("correlation_map");
    g.sample_size(10);
    for (name, pool) in pools() {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| correlation_map(&d, 1.0, &taus, &opts).unwrap()))
        });
    }
    g.finish();
}

fn bench_optimizer(c: &mut Criterion) {
    let target = SpectralTarget::equal(&[0, 1]).unwrap();
    let cfg = OptimizerConfig { restarts: 4, max_iterations: 60, ..OptimizerConfig::new(TAU * 1.5e9, 4) };
    let mut g = c.benchmark_group("optimizer_restarts");
    g.sample_size(10);
    for (name, pool) in pools() {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| optimize_waveform(&target, &cfg).unwrap()))
        });
    }
    g.finish();
}

fn bench_ramsey(c: &mut Criterion) {
    let omegas: Vec<f64> = (0..=40).map(|i| TAU * 0.25e9 * i as f64).collect();
    let cfg = RamseySweepConfig { n_phases: 1024, ..Default::default() };
    let mut g = c.benchmark_group("contrast_sweep");
    g.sample_size(10);
    for (name, pool) in pools() {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| contrast_sweep(TAU * 3e9, 200e-12, &omegas, &cfg).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, bench_spectrum_map, bench_correlation_map, bench_optimizer, bench_ramsey);
criterion_main!(benches);
