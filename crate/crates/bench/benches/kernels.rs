use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use twophase_core::exact::{HProfile, Profile, ProfileSpec};
use twophase_core::freeboundary::{extract_free_boundary, Phase};
use twophase_core::monotonicity::{weighted_energy, EnergyOptions, EnergySource, Part};
use twophase_core::solver::solve;
use twophase_core::{BoundaryData, CoefficientPair, GridSpec, Point, SolveControls};

fn h_profile() -> ProfileSpec {
    ProfileSpec::H(HProfile::new(1.0, 2.0, vec![1.0, 0.3]).unwrap())
}

fn solver(c: &mut Criterion) {
    let grid = GridSpec::cube(2, 1.0, 33, (-1.0, 1.0), 33).unwrap();
    let coeffs = CoefficientPair::constant(1.0, 2.0).unwrap();
    let data = BoundaryData::from_profile(2, h_profile());
    let controls = SolveControls::default();
    c.bench_function("solve_h_33x33x33", |b| {
        b.iter(|| solve(black_box(&grid), &coeffs, &data, &controls).unwrap())
    });
}

fn energy(c: &mut Criterion) {
    let center = Point::origin(2);
    let opts = EnergyOptions::default();
    let analytic = EnergySource::from_profile(2, h_profile(), Part::Positive);
    c.bench_function("weighted_energy_analytic", |b| {
        b.iter(|| weighted_energy(&analytic, black_box(&center), 0.5, &opts).unwrap())
    });

    let grid = GridSpec::cube(2, 4.0, 129, (-1.0, 0.0), 65).unwrap();
    let field = h_profile().sample(&grid).unwrap();
    let sampled = EnergySource::from_field(&field, Part::Positive).unwrap();
    let opts = EnergyOptions {
        truncation: 6.0,
        ..opts
    };
    c.bench_function("weighted_energy_sampled", |b| {
        b.iter(|| weighted_energy(&sampled, black_box(&center), 0.5, &opts).unwrap())
    });
}

fn free_boundary(c: &mut Criterion) {
    let grid = GridSpec::cube(2, 1.0, 65, (-1.0, 1.0), 65).unwrap();
    let field = h_profile().sample(&grid).unwrap();
    c.bench_function("extract_free_boundary_65x65x65", |b| {
        b.iter(|| extract_free_boundary(black_box(&field), Phase::Positive))
    });
}

criterion_group!(kernels, solver, energy, free_boundary);
criterion_main!(kernels);
