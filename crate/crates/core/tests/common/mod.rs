#![allow(dead_code)]

use kinlab::collision::{build_tables, CollisionTables, KernelParams, SphereQuadrature, VelocityGrid};
use kinlab::lp::{FourierGrid, SpectralField};
use kinlab::verify::{sample_coefficients, trial_rng};

/// Coarse tables that build in well under a second.
pub fn small_tables(n: usize, kernel: KernelParams) -> CollisionTables {
    let vg = VelocityGrid::new(5.0, n).unwrap();
    let sph = SphereQuadrature::fibonacci(14).unwrap();
    build_tables(&vg, &sph, &kernel).unwrap()
}

pub fn random_field(grid: &FourierGrid, rows: usize, band: u32, seed: u64) -> SpectralField {
    let mut rng = trial_rng(seed, 0, 0);
    sample_coefficients(grid, &vec![1.0; rows], band, 0.5, &mut rng).unwrap()
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
