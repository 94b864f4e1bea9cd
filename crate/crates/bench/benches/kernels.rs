use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use kinlab::collision::{apply_field, build_tables, gamma_field, FieldOp, KernelParams, SphereQuadrature, VelocityGrid};
use kinlab::lp::{paraproduct, DyadicSystem, FourierGrid, DEFAULT_SHARPNESS};
use kinlab::norms::{chemin_lerner_norm, BesovSpec, CLSpec, DistributionTrajectory};
use kinlab::solver::{direct_solve, initial_data, SolverConfig};
use kinlab::verify::{sample_coefficients, trial_rng};

fn dyadic(c: &mut Criterion) {
    let grid = FourierGrid::new(1, 64).unwrap();
    let sys = DyadicSystem::new(&grid, DEFAULT_SHARPNESS).unwrap();
    let f = sample_coefficients(&grid, &[1.0; 64], 31, 0.5, &mut trial_rng(1, 0, 0)).unwrap();
    let g = sample_coefficients(&grid, &[1.0; 64], 31, 0.5, &mut trial_rng(1, 0, 1)).unwrap();
    c.bench_function("dyadic_blocks_64x64", |b| {
        b.iter(|| sys.blocks().map(|q| sys.dyadic_block(q, black_box(&f)).unwrap()).count())
    });
    c.bench_function("paraproduct_64x64", |b| b.iter(|| paraproduct(&sys, black_box(&f), black_box(&g)).unwrap()));
    let vg = VelocityGrid::new(1.0, 4).unwrap();
    let fields = (0..8).map(|i| sample_coefficients(&grid, &[1.0; 64], 31, 0.5, &mut trial_rng(2, i, 0)).unwrap()).collect();
    let traj = DistributionTrajectory::new((0..8).map(|i| 0.1 * i as f64).collect(), fields, Some(vg)).unwrap();
    let spec = CLSpec::new(2.0, 2.0, BesovSpec::critical(1.5));
    c.bench_function("chemin_lerner_norm_8_snapshots", |b| {
        b.iter(|| chemin_lerner_norm(&sys, black_box(&traj), &spec, None).unwrap())
    });
}

fn collision(c: &mut Criterion) {
    let vg = VelocityGrid::new(5.0, 6).unwrap();
    let sph = SphereQuadrature::fibonacci(14).unwrap();
    let kp = KernelParams::default();
    c.bench_function("build_tables_6cubed", |b| b.iter(|| build_tables(&vg, &sph, &kp).unwrap()));
    let tables = build_tables(&vg, &sph, &kp).unwrap();
    let grid = FourierGrid::new(1, 16).unwrap();
    let cfg = SolverConfig::default();
    let f = initial_data(&grid, &vg, &cfg).unwrap();
    c.bench_function("apply_l_field", |b| b.iter(|| apply_field(&tables, FieldOp::L, black_box(&f), None).unwrap()));
    c.bench_function("gamma_field", |b| b.iter(|| gamma_field(&tables, black_box(&f), black_box(&f)).unwrap()));
    let short = SolverConfig { t_final: 0.05, ..cfg };
    let mut group = c.benchmark_group("solver");
    group.sample_size(10);
    group.bench_function("direct_solve_10_steps", |b| b.iter(|| direct_solve(black_box(&f), &tables, &short).unwrap()));
    group.finish();
}

criterion_group!(benches, dyadic, collision);
criterion_main!(benches);
