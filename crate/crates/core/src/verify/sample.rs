//! Random trial fields with prescribed spectral decay.

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::collision::{apply_matrix, PolynomialBasis};
use crate::error::{Error, Result};
use crate::lp::{FourierGrid, SpectralField};
use crate::macroscopic::MomentOperators;

/// Which part of the state space trials are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FieldClass {
    #[default]
    General,
    /// `P f = f`.
    Macroscopic,
    /// `P f = 0`.
    Microscopic,
    /// Snapshots of short solver runs from sampled initial data.
    Trajectory,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrialSpec {
    pub seed: u64,
    pub n_trials: usize,
    /// Coefficients of the mode `k` scale like `(1 + |k|)^{-decay}`.
    pub spectral_decay: f64,
    /// `L²_{x,ξ}` size of each sampled field.
    pub amplitude: f64,
    pub field_class: FieldClass,
}

impl Default for TrialSpec {
    fn default() -> Self {
        Self { seed: 0, n_trials: 100, spectral_decay: 1.0, amplitude: 1.0, field_class: FieldClass::General }
    }
}

impl TrialSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_trials == 0 {
            return Err(Error::InvalidParameter("n_trials must be at least 1".into()));
        }
        if !(self.spectral_decay > 0.0 && self.spectral_decay.is_finite()) {
            return Err(Error::InvalidParameter(format!("spectral_decay = {}", self.spectral_decay)));
        }
        if !(self.amplitude >= 0.0 && self.amplitude.is_finite()) {
            return Err(Error::InvalidParameter(format!("amplitude = {}", self.amplitude)));
        }
        Ok(())
    }
}

/// Generator of stream `sub` of trial `trial`. Counter-based, so the draws of
/// one trial never depend on how trials are scheduled.
pub fn trial_rng(seed: u64, trial: usize, sub: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((trial as u64) << 16) | sub);
    rng
}

fn lattice_index(grid: &FourierGrid, l: [i64; 3]) -> usize {
    let n = grid.points_per_axis() as i64;
    (0..grid.dim()).fold(0usize, |idx, ax| idx * n as usize + l[ax].rem_euclid(n) as usize)
}

/// Lattice points of `[-band, band]^dim` with first nonzero coordinate
/// positive, in lexicographic order; `0` comes first.
fn half_lattice(dim: usize, band: i64) -> Vec<[i64; 3]> {
    let side = 2 * band + 1;
    let total = side.pow(dim as u32);
    let mut out = vec![[0i64; 3]];
    for code in 0..total {
        let mut l = [0i64; 3];
        let mut rem = code;
        for ax in (0..dim).rev() {
            l[ax] = rem % side - band;
            rem /= side;
        }
        if l.iter().find(|&&c| c != 0).is_some_and(|&c| c > 0) {
            out.push(l);
        }
    }
    out
}

/// Real multi-row spatial field: row `a` gets Gaussian coefficients scaled by
/// `row_weights[a]·(1 + |k|)^{-decay}` on the modes `|l|_∞ ≤ band`. The
/// draws depend only on `(rng, band, rows)`, so a trial gives the same
/// continuum field on every grid that resolves the band.
pub fn sample_coefficients(
    grid: &FourierGrid,
    row_weights: &[f64],
    band: u32,
    decay: f64,
    rng: &mut ChaCha8Rng,
) -> Result<SpectralField> {
    let b = band as i64;
    if 2 * b >= grid.points_per_axis() as i64 {
        return Err(Error::UnderResolved(format!("band {band} on {} points", grid.points_per_axis())));
    }
    let mut coeffs = SpectralField::zeros(grid, row_weights.len());
    let unit = grid.k_unit();
    for l in half_lattice(grid.dim(), b) {
        let kn = unit * ((l[0] * l[0] + l[1] * l[1] + l[2] * l[2]) as f64).sqrt();
        let amp = (1.0 + kn).powf(-decay);
        let (i, j) = (lattice_index(grid, l), lattice_index(grid, [-l[0], -l[1], -l[2]]));
        for (a, w) in row_weights.iter().enumerate() {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let s = amp * w;
            let c = if i == j { Complex64::new(re * s, 0.0) } else { Complex64::new(re * s, im * s) };
            coeffs.values[[a, i]] = c;
            coeffs.values[[a, j]] = c.conj();
        }
    }
    Ok(coeffs)
}

/// `Σ_a c_a(x) φ_a(ξ)` with coefficient rows from [`sample_coefficients`];
/// higher Hermite degrees get geometrically smaller coefficients.
pub fn sample_in_basis(
    grid: &FourierGrid,
    basis: &PolynomialBasis,
    band: u32,
    decay: f64,
    rng: &mut ChaCha8Rng,
) -> Result<SpectralField> {
    let weights: Vec<f64> =
        basis.exponents().iter().map(|e| 2f64.powf(-0.5 * (e[0] + e[1] + e[2]) as f64)).collect();
    let coeffs = sample_coefficients(grid, &weights, band, decay, rng)?;
    let m = basis.len();
    let phi = Array2::from_shape_fn((basis.vectors()[0].len(), m), |(r, a)| basis.vectors()[a][r]);
    Ok(apply_matrix(&phi, &coeffs))
}

/// `(∫∫ |f|² dx dξ)^{1/2}` on the grids.
pub fn field_l2(f: &SpectralField, weight: f64) -> f64 {
    (weight * f.grid.volume() * f.values.iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt()
}

/// One trial field: sampled in `basis`, projected according to `class`
/// (`Trajectory` samples like `General`), scaled to `amplitude`.
pub fn sample_field(
    spec: &TrialSpec,
    trial: usize,
    sub: u64,
    grid: &FourierGrid,
    basis: &PolynomialBasis,
    ops: &MomentOperators,
    band: u32,
) -> Result<SpectralField> {
    spec.validate()?;
    let mut rng = trial_rng(spec.seed, trial, sub);
    let raw = sample_in_basis(grid, basis, band, spec.spectral_decay, &mut rng)?;
    let f = match spec.field_class {
        FieldClass::General | FieldClass::Trajectory => raw,
        FieldClass::Macroscopic => ops.project(&raw)?.1,
        FieldClass::Microscopic => ops.project(&raw)?.2,
    };
    let w = ops.weight();
    let n = field_l2(&f, w);
    Ok(if n > 0.0 { f.scaled(spec.amplitude / n) } else { f })
}
