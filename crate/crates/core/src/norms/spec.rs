use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Besov index triple `B^s_{p,r}` (`f64::INFINITY` encodes `∞`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesovSpec {
    pub s: f64,
    pub p: f64,
    pub r: f64,
    /// Use `Δ̇_q` blocks instead of `Δ_q`.
    pub homogeneous: bool,
}

impl BesovSpec {
    pub fn new(s: f64, p: f64, r: f64) -> Self {
        Self { s, p, r, homogeneous: false }
    }

    /// `B^s_{2,1}`, the working space.
    pub fn critical(s: f64) -> Self {
        Self::new(s, 2.0, 1.0)
    }

    pub fn homogeneous(mut self) -> Self {
        self.homogeneous = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.s.is_finite() {
            return Err(Error::InvalidParameter(format!("Besov index s = {}", self.s)));
        }
        check_exponent("p", self.p)?;
        check_exponent("r", self.r)
    }
}

/// Chemin-Lerner exponents `L̃^{ρ1}_T L̃^{ρ2}_ξ(B^s_{p,r})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CLSpec {
    pub rho1: f64,
    pub rho2: f64,
    pub besov: BesovSpec,
    /// Velocity integral against `ν(ξ)`: `‖ν^{1/2} g‖_{L^{ρ2}_ξ}`.
    pub nu_weighted: bool,
}

impl CLSpec {
    pub fn new(rho1: f64, rho2: f64, besov: BesovSpec) -> Self {
        Self { rho1, rho2, besov, nu_weighted: false }
    }

    pub fn weighted(mut self) -> Self {
        self.nu_weighted = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_exponent("rho1", self.rho1)?;
        check_exponent("rho2", self.rho2)?;
        self.besov.validate()
    }
}

pub(crate) fn check_exponent(name: &str, v: f64) -> Result<()> {
    if v >= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("exponent {name} = {v} must be >= 1")))
    }
}

/// `(Σ w_i |a_i|^ρ)^{1/ρ}`, or `max |a_i|` for `ρ = ∞`.
pub fn weighted_lp(values: &[f64], weights: &[f64], rho: f64) -> f64 {
    if rho.is_infinite() {
        return values.iter().fold(0.0, |m, v| m.max(v.abs()));
    }
    let s: f64 = values.iter().zip(weights).map(|(v, w)| w * v.abs().powf(rho)).sum();
    s.powf(1.0 / rho)
}

/// `ℓ^r` norm of a sequence.
pub fn lr_sum(values: &[f64], r: f64) -> f64 {
    if r.is_infinite() {
        return values.iter().fold(0.0, |m, v| m.max(v.abs()));
    }
    if r == 1.0 {
        return values.iter().map(|v| v.abs()).sum();
    }
    values.iter().map(|v| v.abs().powf(r)).sum::<f64>().powf(1.0 / r)
}

/// Trapezoid weights for the sample times (all zero for one sample).
pub fn trapezoid_weights(times: &[f64]) -> Vec<f64> {
    let n = times.len();
    let mut w = vec![0.0; n];
    for i in 1..n {
        let h = times[i] - times[i - 1];
        w[i - 1] += 0.5 * h;
        w[i] += 0.5 * h;
    }
    w
}
