use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rns_core::galerkin::{assemble_rhs, Solver, SolverConfig};
use rns_core::heat::{heat_lplq_on_grid, TimeGrid};
use rns_core::randomizer::{draw_gaussians, gaussian_field, make_data, randomize};
use rns_core::spectral::{forward_transform, inverse_transform, leray_project};
use rns_core::{DataFamily, GridSpec, SpectralField};

fn data(m: usize) -> SpectralField {
    let grid = GridSpec::new(m).unwrap();
    let f = make_data(grid, &DataFamily::PowerLaw { gamma: 1.5, amplitude: 1.0 }, 0.5, 1).unwrap().field;
    randomize(&f, &draw_gaussians(grid, 2)).unwrap().randomized
}

fn transforms(c: &mut Criterion) {
    let mut group = c.benchmark_group("fft_round_trip");
    for m in [16, 32, 64] {
        let f = gaussian_field(GridSpec::new(m).unwrap(), 3);
        group.bench_with_input(BenchmarkId::from_parameter(m), &f, |b, f| {
            b.iter(|| forward_transform(&inverse_transform(black_box(f)).unwrap()))
        });
    }
    group.finish();
}

fn leray(c: &mut Criterion) {
    let mut group = c.benchmark_group("leray");
    for m in [16, 32, 64] {
        let f = gaussian_field(GridSpec::new(m).unwrap(), 4);
        group.bench_with_input(BenchmarkId::from_parameter(m), &f, |b, f| b.iter(|| leray_project(black_box(f))));
    }
    group.finish();
}

fn rhs(c: &mut Criterion) {
    let mut group = c.benchmark_group("rhs");
    group.sample_size(20);
    for m in [16, 32] {
        let f = data(m);
        let cfg = SolverConfig::new(f.clone(), m as f64 / 4.0, 1e-3, 1e-3, 0.5);
        let v = SpectralField::zeros(f.grid());
        group.bench_with_input(BenchmarkId::new("assemble", m), &cfg, |b, cfg| {
            b.iter(|| assemble_rhs(black_box(&v), 0.1, cfg).unwrap())
        });
        let mut solver = Solver::new(cfg.clone()).unwrap();
        let init = solver.initial_state();
        group.bench_function(BenchmarkId::new("rk4_step", m), |b| {
            b.iter_batched(
                || init.clone(),
                |mut s| solver.step(&mut s).unwrap(),
                criterion::BatchSize::SmallInput,
            )
        });
    }
    group.finish();
}

fn heat_norm(c: &mut Criterion) {
    let mut group = c.benchmark_group("heat_lplq");
    group.sample_size(20);
    for m in [8, 16] {
        let f = data(m);
        let r = f.support_radius();
        let tg = TimeGrid::resolving(1.0, 32, r * r).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(m), &f, |b, f| {
            b.iter(|| heat_lplq_on_grid(black_box(f), 3.0, 4.0, &tg).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, transforms, leray, rhs, heat_norm);
criterion_main!(benches);
