//! Velocity lattice, sphere rule and kernel parameters.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `(2π)^{-3/2}`.
const MAXWELL_NORM: f64 = 0.063_493_635_934_240_97;

/// Global Maxwellian `μ(ξ) = (2π)^{-3/2} e^{-|ξ|²/2}`.
pub fn maxwellian(v: [f64; 3]) -> f64 {
    MAXWELL_NORM * (-0.5 * norm_sq(v)).exp()
}

/// `μ^{1/2}(ξ)`.
pub fn sqrt_maxwellian(v: [f64; 3]) -> f64 {
    MAXWELL_NORM.sqrt() * (-0.25 * norm_sq(v)).exp()
}

pub(crate) fn norm_sq(v: [f64; 3]) -> f64 {
    v[0] * v[0] + v[1] * v[1] + v[2] * v[2]
}

pub(crate) fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Cubic midpoint lattice on `[-R, R]³`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VelocityGrid {
    half_width: f64,
    n: usize,
    #[serde(skip)]
    nodes: Vec<[f64; 3]>,
    #[serde(skip)]
    sqrt_mu: Vec<f64>,
}

impl VelocityGrid {
    pub const DEFAULT_HALF_WIDTH: f64 = 6.0;
    pub const DEFAULT_POINTS: usize = 12;

    pub fn new(half_width: f64, n: usize) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) || n < 2 {
            return Err(Error::InvalidGrid(format!("velocity grid R = {half_width}, n = {n}")));
        }
        let h = 2.0 * half_width / n as f64;
        let axis: Vec<f64> = (0..n).map(|i| -half_width + h * (i as f64 + 0.5)).collect();
        let mut nodes = Vec::with_capacity(n * n * n);
        for &x in &axis {
            for &y in &axis {
                for &z in &axis {
                    nodes.push([x, y, z]);
                }
            }
        }
        let sqrt_mu = nodes.iter().map(|&v| sqrt_maxwellian(v)).collect();
        Ok(Self { half_width, n, nodes, sqrt_mu })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points_per_axis(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    /// Product midpoint weight (identical for every node).
    pub fn weight(&self) -> f64 {
        self.spacing().powi(3)
    }

    pub fn nodes(&self) -> &[[f64; 3]] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> [f64; 3] {
        self.nodes[i]
    }

    /// `μ^{1/2}` at every node.
    pub fn sqrt_mu(&self) -> &[f64] {
        &self.sqrt_mu
    }

    /// Flattened index of lattice coordinates.
    pub fn index(&self, c: [usize; 3]) -> usize {
        (c[0] * self.n + c[1]) * self.n + c[2]
    }

    pub fn coords(&self, i: usize) -> [usize; 3] {
        [i / (self.n * self.n), (i / self.n) % self.n, i % self.n]
    }

    /// `Σ_ξ w μ(ξ)`; equals 1 up to truncation and midpoint error.
    pub fn maxwellian_mass(&self) -> f64 {
        self.sqrt_mu.iter().map(|s| s * s).sum::<f64>() * self.weight()
    }

    /// `L²_ξ` inner product by grid quadrature.
    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() * self.weight()
    }

    /// Samples `ψ(ξ)` at every node.
    pub fn sample(&self, psi: impl Fn([f64; 3]) -> f64) -> Vec<f64> {
        self.nodes.iter().map(|&v| psi(v)).collect()
    }
}

/// Equal-weight rule on `𝕊²`.
///
/// Nodes come in antipodal pairs: the first half is a Fibonacci spiral on the
/// upper hemisphere and the second half its reflection through the origin, so
/// every odd moment vanishes identically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereQuadrature {
    nodes: Vec<[f64; 3]>,
    weights: Vec<f64>,
}

impl SphereQuadrature {
    pub const DEFAULT_NODES: usize = 26;

    pub fn fibonacci(n: usize) -> Result<Self> {
        if n < 2 || n % 2 != 0 {
            return Err(Error::InvalidParameter(format!("sphere rule needs an even node count, got {n}")));
        }
        let half = n / 2;
        let golden = PI * (3.0 - 5f64.sqrt());
        let mut nodes = Vec::with_capacity(n);
        for i in 0..half {
            let t = i as f64 + 0.5;
            let z = 1.0 - t / half as f64;
            let r = (1.0 - z * z).sqrt();
            let a = golden * t;
            nodes.push([r * a.cos(), r * a.sin(), z]);
        }
        for i in 0..half {
            let p = nodes[i];
            nodes.push([-p[0], -p[1], -p[2]]);
        }
        let weights = vec![4.0 * PI / n as f64; n];
        Ok(Self { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[[f64; 3]] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate(&self, f: impl Fn([f64; 3]) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&w, &q)| q * f(w)).sum()
    }
}

/// Angular factor `B₀(θ)` of the cutoff kernel, as a function of `cos θ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AngularKernel {
    /// `B₀ = scale·|cos θ|`.
    AbsCos { scale: f64 },
    /// `B₀ = scale·cos²θ`.
    CosSquared { scale: f64 },
}

impl AngularKernel {
    pub fn eval(&self, cos_theta: f64) -> f64 {
        match *self {
            AngularKernel::AbsCos { scale } => scale * cos_theta.abs(),
            AngularKernel::CosSquared { scale } => scale * cos_theta * cos_theta,
        }
    }
}

impl Default for AngularKernel {
    fn default() -> Self {
        AngularKernel::AbsCos { scale: 1.0 }
    }
}

/// Cutoff hard-potential kernel `|ξ-ξ_*|^γ B₀(θ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelParams {
    pub gamma: f64,
    pub angular: AngularKernel,
    /// `C` in `0 ≤ B₀(θ) ≤ C|cos θ|`.
    pub bound_constant: f64,
}

impl Default for KernelParams {
    fn default() -> Self {
        Self { gamma: 1.0, angular: AngularKernel::default(), bound_constant: 1.0 }
    }
}

impl KernelParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::InvalidParameter(format!("gamma = {} outside [0, 1]", self.gamma)));
        }
        for i in 0..=1000 {
            let c = -1.0 + 2.0 * i as f64 / 1000.0;
            let b = self.angular.eval(c);
            if !(b >= 0.0 && b <= self.bound_constant * c.abs() + 1e-14) {
                return Err(Error::InvalidParameter(format!(
                    "B0 violates 0 <= B0 <= C|cos θ| at cos θ = {c}"
                )));
            }
        }
        Ok(())
    }

    /// `∫_{𝕊²} B₀ dω = 2π ∫_{-1}^{1} B₀(t) dt`, by Gauss-Legendre on each half.
    pub fn angular_mass(&self) -> f64 {
        let (x, w) = gauss_legendre(24);
        let mut s = 0.0;
        for (xi, wi) in x.iter().zip(&w) {
            // map [-1,1] onto [0,1] and [-1,0]
            let t = 0.5 * (xi + 1.0);
            s += 0.5 * wi * (self.angular.eval(t) + self.angular.eval(-t));
        }
        2.0 * PI * s
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` (Newton on `P_n`).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, z);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre(n, z);
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

fn legendre(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, dp)
}
