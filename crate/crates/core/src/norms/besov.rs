//! Besov, Chemin-Lerner and classical mixed norms.

use ndarray::Axis;

use crate::collision::{CollisionTables, VelocityGrid};
use crate::error::{Error, Result};
use crate::lp::{DyadicSystem, SpectralField, Transform};
use crate::norms::spec::{lr_sum, trapezoid_weights, weighted_lp, BesovSpec, CLSpec};

/// Time-indexed snapshots of `f̂(t; k, ξ)`.
#[derive(Debug, Clone)]
pub struct DistributionTrajectory {
    times: Vec<f64>,
    fields: Vec<SpectralField>,
    velocity: Option<VelocityGrid>,
}

impl DistributionTrajectory {
    /// Trajectory of fields whose rows are nodes of `velocity` (or a single
    /// row per field when `velocity` is `None`).
    pub fn new(times: Vec<f64>, fields: Vec<SpectralField>, velocity: Option<VelocityGrid>) -> Result<Self> {
        if times.is_empty() || times.len() != fields.len() {
            return Err(Error::Trajectory(format!("{} times for {} snapshots", times.len(), fields.len())));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Trajectory("times must be strictly increasing".into()));
        }
        let rows = velocity.as_ref().map_or(1, |v| v.len());
        for f in &fields {
            fields[0].grid.ensure_same(&f.grid)?;
            if f.n_vel() != rows {
                return Err(Error::Trajectory(format!("snapshot has {} rows, expected {rows}", f.n_vel())));
            }
        }
        Ok(Self { times, fields, velocity })
    }

    /// A one-snapshot trajectory at `t = 0`.
    pub fn single(field: SpectralField, velocity: Option<VelocityGrid>) -> Result<Self> {
        Self::new(vec![0.0], vec![field], velocity)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn fields(&self) -> &[SpectralField] {
        &self.fields
    }

    pub fn velocity(&self) -> Option<&VelocityGrid> {
        self.velocity.as_ref()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Final time `T`.
    pub fn horizon(&self) -> f64 {
        *self.times.last().expect("nonempty") - self.times[0]
    }

    /// Snapshots with `t ≤ t_max`.
    pub fn truncated(&self, t_max: f64) -> Self {
        let k = self.times.iter().take_while(|&&t| t <= t_max).count().max(1);
        Self { times: self.times[..k].to_vec(), fields: self.fields[..k].to_vec(), velocity: self.velocity.clone() }
    }

    /// Pointwise combination `a·self + b·other` on identical time grids.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        if self.times != other.times {
            return Err(Error::Trajectory("time grids differ".into()));
        }
        let fields = self
            .fields
            .iter()
            .zip(&other.fields)
            .map(|(x, y)| x.scaled(a).add(&y.scaled(b)))
            .collect::<Result<_>>()?;
        Ok(Self { times: self.times.clone(), fields, velocity: self.velocity.clone() })
    }
}

fn block_multipliers(sys: &DyadicSystem, homogeneous: bool) -> Result<Vec<(i32, Vec<f64>)>> {
    if homogeneous {
        let (lo, hi) = sys.homogeneous_range();
        (lo..=hi).map(|q| Ok((q, sys.homogeneous_multiplier(q)?.to_vec()))).collect()
    } else {
        sys.blocks().map(|q| Ok((q, sys.block_multiplier(q)?.to_vec()))).collect()
    }
}

/// `‖Δ_q f(·, ξ_r)‖_{L^p_x}` for every block `q` and row `r`, as `[q][r]`.
pub fn block_row_norms(sys: &DyadicSystem, f: &SpectralField, p: f64, homogeneous: bool) -> Result<Vec<Vec<f64>>> {
    sys.grid().ensure_same(&f.grid)?;
    let mults = block_multipliers(sys, homogeneous)?;
    let vol = f.grid.volume();
    let cell = f.grid.cell_volume();
    if p == 2.0 {
        // Parseval
        let power: Vec<Vec<f64>> =
            f.values.axis_iter(Axis(0)).map(|row| row.iter().map(|c| c.norm_sqr()).collect()).collect();
        return Ok(mults
            .iter()
            .map(|(_, m)| {
                power
                    .iter()
                    .map(|pw| (vol * pw.iter().zip(m).map(|(a, b)| a * b * b).sum::<f64>()).sqrt())
                    .collect()
            })
            .collect());
    }
    let tr = Transform::new(f.grid.dim(), f.grid.points_per_axis());
    let weights = vec![cell; f.grid.len()];
    Ok(mults
        .iter()
        .map(|(_, m)| {
            f.values
                .axis_iter(Axis(0))
                .map(|row| {
                    let mut buf: Vec<_> = row.iter().zip(m).map(|(c, w)| c * *w).collect();
                    tr.inverse(&mut buf);
                    let re: Vec<f64> = buf.iter().map(|c| c.re).collect();
                    weighted_lp(&re, &weights, p)
                })
                .collect()
        })
        .collect())
}

/// Block indices matching [`block_row_norms`].
pub fn block_indices(sys: &DyadicSystem, homogeneous: bool) -> Vec<i32> {
    if homogeneous {
        let (lo, hi) = sys.homogeneous_range();
        (lo..=hi).collect()
    } else {
        sys.blocks().collect()
    }
}

/// `‖f‖_{B^s_{p,r}} = ‖(2^{qs}‖Δ_q f‖_{L^p_x})_q‖_{ℓ^r}`. Several rows are
/// combined in `ℓ²` inside each block.
pub fn besov_norm(sys: &DyadicSystem, f: &SpectralField, spec: &BesovSpec) -> Result<f64> {
    spec.validate()?;
    let rows = block_row_norms(sys, f, spec.p, spec.homogeneous)?;
    let idx = block_indices(sys, spec.homogeneous);
    let terms: Vec<f64> = rows
        .iter()
        .zip(&idx)
        .map(|(r, &q)| 2f64.powf(q as f64 * spec.s) * r.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    Ok(lr_sum(&terms, spec.r))
}

/// Per-block contributions `(q, ‖Δ_q f‖, 2^{qs}, 2^{qs}‖Δ_q f‖)`.
pub fn besov_table(sys: &DyadicSystem, f: &SpectralField, spec: &BesovSpec) -> Result<Vec<(i32, f64, f64, f64)>> {
    spec.validate()?;
    let rows = block_row_norms(sys, f, spec.p, spec.homogeneous)?;
    let idx = block_indices(sys, spec.homogeneous);
    Ok(rows
        .iter()
        .zip(&idx)
        .map(|(r, &q)| {
            let n = r.iter().map(|v| v * v).sum::<f64>().sqrt();
            let w = 2f64.powf(q as f64 * spec.s);
            (q, n, w, w * n)
        })
        .collect())
}

/// Velocity weights `w_ξ` and multipliers (`√ν` or 1) for the rows of `traj`.
fn velocity_factors(traj: &DistributionTrajectory, spec: &CLSpec, nu: Option<&[f64]>) -> Result<(Vec<f64>, Vec<f64>)> {
    let rows = traj.fields[0].n_vel();
    let weights = traj.velocity.as_ref().map_or(vec![1.0; rows], |v| vec![v.weight(); rows]);
    let scale = if spec.nu_weighted {
        let nu = nu.ok_or(Error::MissingNu)?;
        if nu.len() != rows {
            return Err(Error::GridMismatch(format!("{} ν values for {rows} rows", nu.len())));
        }
        nu.iter().map(|v| v.sqrt()).collect()
    } else {
        vec![1.0; rows]
    };
    Ok((weights, scale))
}

/// `[t][q][ξ]` block norms with the velocity multiplier applied.
fn norm_cube(sys: &DyadicSystem, traj: &DistributionTrajectory, spec: &CLSpec, scale: &[f64]) -> Result<Vec<Vec<Vec<f64>>>> {
    traj.fields
        .iter()
        .map(|f| {
            let mut b = block_row_norms(sys, f, spec.besov.p, spec.besov.homogeneous)?;
            for row in b.iter_mut() {
                row.iter_mut().zip(scale).for_each(|(v, s)| *v *= s);
            }
            Ok(b)
        })
        .collect()
}

fn nu_of(tables: Option<&CollisionTables>) -> Option<&[f64]> {
    tables.map(|t| t.nu())
}

/// `(Σ_q (2^{qs}‖Δ_q f‖_{L^{ρ1}_T L^{ρ2}_ξ L^p_x})^r)^{1/r}`.
pub fn chemin_lerner_norm(
    sys: &DyadicSystem,
    traj: &DistributionTrajectory,
    spec: &CLSpec,
    tables: Option<&CollisionTables>,
) -> Result<f64> {
    spec.validate()?;
    let (wv, scale) = velocity_factors(traj, spec, nu_of(tables))?;
    let cube = norm_cube(sys, traj, spec, &scale)?;
    let tw = trapezoid_weights(&traj.times);
    let idx = block_indices(sys, spec.besov.homogeneous);
    let terms: Vec<f64> = idx
        .iter()
        .enumerate()
        .map(|(bi, &q)| {
            let per_t: Vec<f64> = cube.iter().map(|c| weighted_lp(&c[bi], &wv, spec.rho2)).collect();
            2f64.powf(q as f64 * spec.besov.s) * weighted_lp(&per_t, &tw, spec.rho1)
        })
        .collect();
    Ok(lr_sum(&terms, spec.besov.r))
}

/// `‖f‖_{L^{ρ1}_T L^{ρ2}_ξ(B^s_{p,r})}`: the block sum is taken innermost.
pub fn classical_norm(
    sys: &DyadicSystem,
    traj: &DistributionTrajectory,
    spec: &CLSpec,
    tables: Option<&CollisionTables>,
) -> Result<f64> {
    spec.validate()?;
    let (wv, scale) = velocity_factors(traj, spec, nu_of(tables))?;
    let cube = norm_cube(sys, traj, spec, &scale)?;
    let tw = trapezoid_weights(&traj.times);
    let idx = block_indices(sys, spec.besov.homogeneous);
    let weights: Vec<f64> = idx.iter().map(|&q| 2f64.powf(q as f64 * spec.besov.s)).collect();
    let rows = wv.len();
    let per_t: Vec<f64> = cube
        .iter()
        .map(|c| {
            let per_xi: Vec<f64> = (0..rows)
                .map(|r| {
                    let seq: Vec<f64> = c.iter().zip(&weights).map(|(b, w)| w * b[r]).collect();
                    lr_sum(&seq, spec.besov.r)
                })
                .collect();
            weighted_lp(&per_xi, &wv, spec.rho2)
        })
        .collect();
    Ok(weighted_lp(&per_t, &tw, spec.rho1))
}
