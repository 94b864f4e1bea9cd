use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Treatment of `Γ_loss(f^n, f^{n+1})` inside a Picard sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum LossCoupling {
    /// `f^{n+1}` taken at the start of the step.
    #[default]
    Lagged,
    /// `f^{n+1}` taken at the end of the step, by fixed-point iteration.
    Implicit,
}

/// Initial perturbation `f₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    /// `amplitude·μ^{1/2}·cos(m x₁)`.
    Cosine { wavenumber: u32 },
    /// Seeded band-limited field with polynomial velocity profile of degree
    /// at most 3, coefficients decaying like `(1 + |k|)^{-decay}`.
    Random { band: u32, decay: f64 },
    /// `(a + ξ·b + (|ξ|²-3)c)μ^{1/2}·cos(m x₁)` with fixed `(a, b, c)`.
    Macroscopic { wavenumber: u32 },
}

impl Default for InitialData {
    fn default() -> Self {
        InitialData::Cosine { wavenumber: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub dt: f64,
    pub t_final: f64,
    /// Scale of `f₀`. Non-cosine data are normalised to the energy of the
    /// cosine with this amplitude.
    pub amplitude: f64,
    pub picard_max: usize,
    /// Sweeps stop once `Ỹ_T(f^{n+1} - f^n) ≤ picard_tol·Ỹ_T(f^{n+1})`.
    pub picard_tol: f64,
    /// Time window `T*` of the Picard iteration.
    pub picard_window: f64,
    pub loss_coupling: LossCoupling,
    pub implicit_iterations: usize,
    /// Time between stored snapshots (rounded to whole steps).
    pub snapshot_interval: f64,
    pub seed: u64,
    pub initial: InitialData,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dt: 5e-3,
            t_final: 1.0,
            amplitude: 1e-3,
            picard_max: 6,
            picard_tol: 1e-12,
            picard_window: 0.05,
            loss_coupling: LossCoupling::Lagged,
            implicit_iterations: 3,
            snapshot_interval: 0.05,
            seed: 0,
            initial: InitialData::default(),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt = {}", self.dt));
        }
        if !(self.t_final >= self.dt && self.t_final.is_finite()) {
            return bad(format!("t_final = {} must be at least dt = {}", self.t_final, self.dt));
        }
        if !(self.amplitude >= 0.0 && self.amplitude.is_finite()) {
            return bad(format!("amplitude = {}", self.amplitude));
        }
        if !(self.picard_window >= self.dt) {
            return bad(format!("picard_window = {} shorter than dt", self.picard_window));
        }
        if !(self.snapshot_interval > 0.0) {
            return bad(format!("snapshot_interval = {}", self.snapshot_interval));
        }
        if self.picard_tol < 0.0 {
            return bad(format!("picard_tol = {}", self.picard_tol));
        }
        if let InitialData::Random { band, decay } = self.initial {
            if band == 0 || !(decay > 0.0) {
                return bad(format!("random initial data needs band >= 1 and decay > 0, got {band}, {decay}"));
            }
        }
        Ok(())
    }

    /// Number of steps covering `[0, t]`.
    pub fn steps_for(&self, t: f64) -> usize {
        ((t / self.dt) - 1e-9).ceil().max(1.0) as usize
    }

    pub fn steps(&self) -> usize {
        self.steps_for(self.t_final)
    }

    /// Steps between stored snapshots.
    pub fn snapshot_stride(&self) -> usize {
        ((self.snapshot_interval / self.dt).round() as usize).max(1)
    }
}
