//! Smooth dyadic partition of unity and the block operators built from it.

use crate::error::{Error, Result};
use crate::lp::grid::{FourierGrid, SpectralField};

/// Plateau radius of the low-frequency cutoff.
pub const INNER_RADIUS: f64 = 3.0 / 4.0;
/// Support radius of the low-frequency cutoff.
pub const OUTER_RADIUS: f64 = 4.0 / 3.0;
/// Outer radius of the annulus carrying `φ`.
pub const SHELL_RADIUS: f64 = 8.0 / 3.0;

/// `χ` as a function of `|k|`: 1 on `[0, 3/4]`, 0 on `[4/3, ∞)`, and a
/// `C∞` transition built from `exp(-s/t)` in between.
pub fn chi_profile(r: f64, sharpness: f64) -> f64 {
    if r <= INNER_RADIUS {
        return 1.0;
    }
    if r >= OUTER_RADIUS {
        return 0.0;
    }
    let t = (r - INNER_RADIUS) / (OUTER_RADIUS - INNER_RADIUS);
    let a = (-sharpness / t).exp();
    let b = (-sharpness / (1.0 - t)).exp();
    // 1 - a/(a+b), written to stay exact at the ends
    b / (a + b)
}

/// The shell profile `φ(k) = χ(k/2) - χ(k)`.
pub fn phi_profile(r: f64, sharpness: f64) -> f64 {
    (chi_profile(0.5 * r, sharpness) - chi_profile(r, sharpness)).max(0.0)
}

/// Dyadic system on a concrete grid: multipliers for `Δ_q` (`q ≥ -1`) and
/// for the homogeneous `Δ̇_q` on the finite range the torus supports.
#[derive(Debug, Clone)]
pub struct DyadicSystem {
    grid: FourierGrid,
    sharpness: f64,
    q_max: i32,
    homog_lo: i32,
    kmag: Vec<f64>,
    blocks: Vec<Vec<f64>>,
    homog: Vec<Vec<f64>>,
}

impl DyadicSystem {
    pub fn new(grid: &FourierGrid, sharpness: f64) -> Result<Self> {
        if !(sharpness > 0.0 && sharpness.is_finite()) {
            return Err(Error::InvalidParameter(format!("transition sharpness {sharpness}")));
        }
        let kmax = grid.k_max();
        let q_max = (kmax / INNER_RADIUS).log2().ceil() as i32;
        if q_max < 0 {
            return Err(Error::UnderResolved(format!("largest wavenumber {kmax} hosts no q >= 0 block")));
        }
        let kmag: Vec<f64> = (0..grid.len())
            .map(|i| if grid.is_nyquist(i) { f64::INFINITY } else { grid.k_norm(i) })
            .collect();
        let mult = |f: &dyn Fn(f64) -> f64| -> Vec<f64> {
            kmag.iter().map(|&r| if r.is_finite() { f(r) } else { 0.0 }).collect()
        };
        let mut blocks = Vec::with_capacity(q_max as usize + 2);
        blocks.push(mult(&|r| chi_profile(r, sharpness)));
        for q in 0..=q_max {
            let s = 2f64.powi(-q);
            blocks.push(mult(&|r| phi_profile(s * r, sharpness)));
        }

        // homogeneous blocks: every q whose open shell meets a nonzero mode
        let kmin = kmag.iter().cloned().filter(|r| r.is_finite() && *r > 0.0).fold(f64::INFINITY, f64::min);
        let homog_lo = (kmin / SHELL_RADIUS).log2().floor() as i32;
        let mut homog = Vec::new();
        for q in homog_lo..=q_max {
            let s = 2f64.powi(-q);
            homog.push(mult(&|r| if r == 0.0 { 0.0 } else { phi_profile(s * r, sharpness) }));
        }
        // trim empty leading blocks
        let mut lo = homog_lo;
        while homog.first().is_some_and(|m| m.iter().all(|&v| v == 0.0)) {
            homog.remove(0);
            lo += 1;
        }
        Ok(Self { grid: grid.clone(), sharpness, q_max, homog_lo: lo, kmag, blocks, homog })
    }

    pub fn grid(&self) -> &FourierGrid {
        &self.grid
    }

    pub fn sharpness(&self) -> f64 {
        self.sharpness
    }

    pub fn q_max(&self) -> i32 {
        self.q_max
    }

    /// Inclusive index range of the nonzero homogeneous blocks.
    pub fn homogeneous_range(&self) -> (i32, i32) {
        (self.homog_lo, self.homog_lo + self.homog.len() as i32 - 1)
    }

    pub fn chi(&self, r: f64) -> f64 {
        chi_profile(r, self.sharpness)
    }

    pub fn phi(&self, r: f64) -> f64 {
        phi_profile(r, self.sharpness)
    }

    /// `|k|` per mode (`∞` on the Nyquist row).
    pub fn k_magnitudes(&self) -> &[f64] {
        &self.kmag
    }

    /// Fourier multiplier of `Δ_q`.
    pub fn block_multiplier(&self, q: i32) -> Result<&[f64]> {
        self.check_block(q)?;
        Ok(&self.blocks[(q + 1) as usize])
    }

    /// Fourier multiplier of `Δ̇_q`.
    pub fn homogeneous_multiplier(&self, q: i32) -> Result<&[f64]> {
        let (lo, hi) = self.homogeneous_range();
        if q < lo || q > hi {
            return Err(Error::BlockOutOfRange { q, lo, hi });
        }
        Ok(&self.homog[(q - lo) as usize])
    }

    /// Fourier multiplier of `S_q = Σ_{j ≤ q-1} Δ_j`.
    pub fn low_pass_multiplier(&self, q: i32) -> Result<Vec<f64>> {
        if q < -1 || q > self.q_max + 1 {
            return Err(Error::BlockOutOfRange { q, lo: -1, hi: self.q_max + 1 });
        }
        let mut m = vec![0.0; self.grid.len()];
        for j in -1..q {
            m.iter_mut().zip(&self.blocks[(j + 1) as usize]).for_each(|(a, b)| *a += b);
        }
        Ok(m)
    }

    fn check_block(&self, q: i32) -> Result<()> {
        if q < -1 || q > self.q_max {
            return Err(Error::BlockOutOfRange { q, lo: -1, hi: self.q_max });
        }
        Ok(())
    }

    /// `Δ_q f`.
    pub fn dyadic_block(&self, q: i32, f: &SpectralField) -> Result<SpectralField> {
        self.grid.ensure_same(&f.grid)?;
        Ok(f.apply_multiplier(self.block_multiplier(q)?))
    }

    /// `S_q f`.
    pub fn low_pass(&self, q: i32, f: &SpectralField) -> Result<SpectralField> {
        self.grid.ensure_same(&f.grid)?;
        Ok(f.apply_multiplier(&self.low_pass_multiplier(q)?))
    }

    /// `Δ̇_q f`.
    pub fn homogeneous_block(&self, q: i32, f: &SpectralField) -> Result<SpectralField> {
        self.grid.ensure_same(&f.grid)?;
        Ok(f.apply_multiplier(self.homogeneous_multiplier(q)?))
    }

    /// Nonhomogeneous block indices `-1..=q_max`.
    pub fn blocks(&self) -> impl Iterator<Item = i32> {
        -1..=self.q_max
    }

    /// Largest deviation of `χ + Σ_q φ(2^{-q}·)` from 1 over all grid modes.
    pub fn partition_defect(&self) -> f64 {
        (0..self.grid.len())
            .filter(|&i| self.kmag[i].is_finite())
            .map(|i| (self.blocks.iter().map(|b| b[i]).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}
