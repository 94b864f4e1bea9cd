use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::collision::{PolynomialBasis, VelocityGrid};
use crate::error::Result;
use crate::lp::{DyadicSystem, FourierGrid, SpectralField, DEFAULT_SHARPNESS};
use crate::norms::{block_row_norms, ENERGY_INDEX};
use crate::solver::config::{InitialData, SolverConfig};

/// `Σ_q 2^{3q/2}‖Δ_q f‖_{L²_ξ L²_x}`.
fn energy_norm(sys: &DyadicSystem, f: &SpectralField, w: f64) -> Result<f64> {
    let rows = block_row_norms(sys, f, 2.0, false)?;
    Ok(sys
        .blocks()
        .zip(&rows)
        .map(|(q, r)| 2f64.powf(q as f64 * ENERGY_INDEX) * (w * r.iter().map(|v| v * v).sum::<f64>()).sqrt())
        .sum())
}

fn cosine_profile(grid: &FourierGrid, vg: &VelocityGrid, m: u32, profile: &[f64]) -> Result<SpectralField> {
    let phys = Array2::from_shape_fn((vg.len(), grid.len()), |(r, p)| {
        profile[r] * (m as f64 * grid.k_unit() * grid.point(p)[0]).cos()
    });
    SpectralField::from_physical(grid, &phys)
}

fn random_profile(grid: &FourierGrid, vg: &VelocityGrid, band: u32, decay: f64, seed: u64) -> Result<SpectralField> {
    let basis = PolynomialBasis::new(vg, PolynomialBasis::DEFAULT_DEGREE);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coeffs = SpectralField::zeros(grid, basis.len());
    coeffs.real = false;
    for k in 0..grid.len() {
        let l = grid.lattice(k);
        let lmax = l.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0);
        let amp = (1.0 + grid.k_norm(k)).powf(-decay);
        for a in 0..basis.len() {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            if lmax <= band as u64 && !grid.is_nyquist(k) {
                coeffs.values[[a, k]] = Complex64::new(re, im) * amp;
            }
        }
    }
    // real part of the synthesised coefficients, then the velocity profile
    let c_phys = coeffs.to_physical();
    let phi = Array2::from_shape_fn((vg.len(), basis.len()), |(r, a)| basis.vectors()[a][r]);
    SpectralField::from_physical(grid, &phi.dot(&c_phys))
}

/// `f₀` of `cfg` on `grid × vg`.
pub fn initial_data(grid: &FourierGrid, vg: &VelocityGrid, cfg: &SolverConfig) -> Result<SpectralField> {
    cfg.validate()?;
    let sm = vg.sqrt_mu();
    if let InitialData::Cosine { wavenumber } = cfg.initial {
        let prof: Vec<f64> = sm.iter().map(|s| cfg.amplitude * s).collect();
        return cosine_profile(grid, vg, wavenumber, &prof);
    }
    let sys = DyadicSystem::new(grid, DEFAULT_SHARPNESS)?;
    let w = vg.weight();
    let reference = energy_norm(&sys, &cosine_profile(grid, vg, 1, sm)?, w)? * cfg.amplitude;
    let raw = match cfg.initial {
        InitialData::Random { band, decay } => random_profile(grid, vg, band, decay, cfg.seed)?,
        InitialData::Macroscopic { wavenumber } => {
            let (a, b, c) = (1.0, [0.5, -0.25, 0.125], 0.25);
            let prof: Vec<f64> = vg
                .nodes()
                .iter()
                .zip(sm)
                .map(|(v, s)| {
                    let r2: f64 = v.iter().map(|x| x * x).sum();
                    (a + b[0] * v[0] + b[1] * v[1] + b[2] * v[2] + c * (r2 - 3.0)) * s
                })
                .collect();
            cosine_profile(grid, vg, wavenumber, &prof)?
        }
        InitialData::Cosine { .. } => unreachable!(),
    };
    let e = energy_norm(&sys, &raw, w)?;
    Ok(if e > 0.0 { raw.scaled(reference / e) } else { raw })
}
