use std::collections::VecDeque;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::collision::{apply_diagonal, CollisionTables};
use crate::error::{Error, Result};
use crate::lp::{FourierGrid, SpectralField};
use crate::macroscopic::{difference_stencil, frame_residuals, FluidResiduals, MomentFrame};
use crate::norms::{block_powers, DistributionTrajectory, EnergyAccumulator, EnergyFunctionals};
use crate::solver::config::SolverConfig;
use crate::solver::engine::{check_finite, Engine};

/// Diagnostics of one time level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRow {
    pub step: usize,
    pub t: f64,
    /// `𝓔(f(t)) = Σ_q 2^{3q/2}‖Δ_q f(t)‖`.
    pub energy: f64,
    /// Instantaneous dissipation rate.
    pub dissipation: f64,
    pub e_t: f64,
    pub d_t: f64,
    pub y_t: f64,
    pub y_tilde_t: f64,
    /// `min_{x,ξ}(μ + μ^{1/2} f)`.
    pub positivity_margin: f64,
    pub a_norm: f64,
    pub b_norm: f64,
    pub c_norm: f64,
    /// Spatial mean of `a`.
    pub mass_mean: f64,
    pub residuals: FluidResiduals,
}

const CSV_HEADER: &str = "step,t,energy,dissipation,E_T,D_T,Y_T,Ytilde_T,positivity_margin,a_norm,b_norm,c_norm,mass_mean,res_mass,res_momentum,res_energy,res_theta,res_lambda";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsLog {
    pub rows: Vec<DiagnosticsRow>,
}

impl DiagnosticsLog {
    /// One CSV row per step, fixed 12-digit scientific formatting.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let vals = [
                r.t,
                r.energy,
                r.dissipation,
                r.e_t,
                r.d_t,
                r.y_t,
                r.y_tilde_t,
                r.positivity_margin,
                r.a_norm,
                r.b_norm,
                r.c_norm,
                r.mass_mean,
            ];
            let _ = write!(out, "{}", r.step);
            for v in vals.iter().chain(r.residuals.as_array().iter()) {
                let _ = write!(out, ",{v:.12e}");
            }
            out.push('\n');
        }
        out
    }

    pub fn energies(&self) -> Vec<(f64, f64)> {
        self.rows.iter().map(|r| (r.t, r.energy)).collect()
    }

    pub fn min_margin(&self) -> f64 {
        self.rows.iter().map(|r| r.positivity_margin).fold(f64::INFINITY, f64::min)
    }

    pub fn max_residuals(&self) -> FluidResiduals {
        self.rows.iter().fold(FluidResiduals::default(), |acc, r| acc.max_with(&r.residuals))
    }
}

/// Output of [`direct_solve`].
#[derive(Debug, Clone)]
pub struct Solution {
    /// Snapshots every `snapshot_interval` and at the final time.
    pub trajectory: DistributionTrajectory,
    pub log: DiagnosticsLog,
    /// Functionals over the whole run.
    pub functionals: EnergyFunctionals,
    /// `𝓔(f₀)`.
    pub initial_energy: f64,
}

fn l2_row(f: &SpectralField, row: usize) -> f64 {
    (f.grid.volume() * f.values.row(row).iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt()
}

/// Time-marches `∂_t f + ξ·∇_x f + ν f = K f + Γ(f, f)` from `f0`.
///
/// `Γ` uses the Galerkin gain and the conservative projection; the `k = 0`
/// invariant coordinates are restored after each step, so the mean mass,
/// momentum and energy stay at their initial values.
pub fn direct_solve(f0: &SpectralField, tables: &CollisionTables, cfg: &SolverConfig) -> Result<Solution> {
    cfg.validate()?;
    if f0.n_vel() != tables.len() {
        return Err(Error::GridMismatch(format!("f0 has {} rows, tables {}", f0.n_vel(), tables.len())));
    }
    if !f0.real {
        return Err(Error::InvalidParameter("initial data must be real".into()));
    }
    let eng = Engine::new(&f0.grid, tables, cfg.dt)?;
    let steps = cfg.steps();
    let stride = cfg.snapshot_stride();
    let target = eng.mean_invariants(f0);
    let mut acc = EnergyAccumulator::new(&eng.sys);
    let mut f = f0.clone();
    let mut frames: VecDeque<MomentFrame> = VecDeque::with_capacity(3);
    let mut rows: Vec<DiagnosticsRow> = Vec::with_capacity(steps + 1);
    let (mut times, mut snaps) = (Vec::new(), Vec::new());
    let mut initial_energy = 0.0;
    for n in 0..=steps {
        let t = n as f64 * cfg.dt;
        check_finite(&f, n, t)?;
        let (rhs, margin) = eng.full_rhs(&f);
        let powers = block_powers(&eng.sys, &eng.ops, tables, &f)?;
        let energy = powers.energy_norm(&eng.sys);
        if n == 0 {
            initial_energy = energy;
        }
        let dissipation = powers.dissipation_norm(&eng.sys);
        acc.push(t, powers)?;
        let func = acc.functionals();
        // -L{I-P}f + Γ(f, f) = rhs - ν f since L kills the invariants
        let h = rhs.sub(&apply_diagonal(tables.nu(), &f))?;
        let frame = MomentFrame::new(&eng.ops, t, &f, &h)?;
        rows.push(DiagnosticsRow {
            step: n,
            t,
            energy,
            dissipation,
            e_t: func.e_t,
            d_t: func.d_t,
            y_t: func.y_t,
            y_tilde_t: func.y_tilde_t,
            positivity_margin: margin,
            a_norm: l2_row(&frame.coeffs, 0),
            b_norm: (1..4).map(|i| l2_row(&frame.coeffs, i).powi(2)).sum::<f64>().sqrt(),
            c_norm: l2_row(&frame.coeffs, 4),
            mass_mean: frame.coeffs.values[[0, 0]].re,
            residuals: FluidResiduals::default(),
        });
        if frames.len() == 3 {
            frames.pop_front();
        }
        frames.push_back(frame);
        if n >= 1 {
            // residual of the previous level, now that its successor exists
            let j = n - 1;
            let (lo, hi) = difference_stencil(j, steps + 1);
            let base = n + 1 - frames.len();
            rows[j].residuals = frame_residuals(&frames[lo - base], &frames[j - base], &frames[hi - base]);
        }
        if n % stride == 0 || n == steps {
            times.push(t);
            snaps.push(f.clone());
        }
        if n < steps {
            f = eng.prop.step(&f, &rhs)?;
            eng.restore_mean_invariants(&mut f, &target);
        }
    }
    let k = frames.len();
    rows[steps].residuals = frame_residuals(&frames[k - 2], &frames[k - 1], &frames[k - 1]);
    let functionals = acc.functionals();
    Ok(Solution {
        trajectory: DistributionTrajectory::new(times, snaps, Some(tables.velocity_grid().clone()))?,
        log: DiagnosticsLog { rows },
        functionals,
        initial_energy,
    })
}

fn l2_field(f: &SpectralField, w: f64) -> f64 {
    (w * f.grid.volume() * f.values.iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt()
}

/// Runs `cfg` and `other` from the same `f0` and returns
/// `sup_t ‖f₁ - f₂‖ / sup_t ‖f₁‖` over the snapshot times they share.
pub fn uniqueness_probe(f0: &SpectralField, tables: &CollisionTables, cfg: &SolverConfig, other: &SolverConfig) -> Result<f64> {
    let a = direct_solve(f0, tables, cfg)?;
    let b = direct_solve(f0, tables, other)?;
    trajectory_gap(&a.trajectory, &b.trajectory, tables.velocity_grid().weight())
}

pub(crate) fn trajectory_gap(a: &DistributionTrajectory, b: &DistributionTrajectory, w: f64) -> Result<f64> {
    let (mut gap, mut scale, mut shared) = (0.0f64, 0.0f64, 0);
    for (t, fa) in a.times().iter().zip(a.fields()) {
        if let Some(j) = b.times().iter().position(|s| (s - t).abs() < 1e-9) {
            gap = gap.max(l2_field(&fa.sub(&b.fields()[j])?, w));
            scale = scale.max(l2_field(fa, w));
            shared += 1;
        }
    }
    if shared == 0 {
        return Err(Error::Trajectory("runs share no snapshot times".into()));
    }
    Ok(if scale > 0.0 { gap / scale } else { gap })
}

/// Gaps between successive runs at `dt, dt/2, …, dt/2^halvings`, each run
/// solved once.
pub fn halving_gaps(f0: &SpectralField, tables: &CollisionTables, cfg: &SolverConfig, halvings: usize) -> Result<Vec<f64>> {
    let w = tables.velocity_grid().weight();
    let mut prev = direct_solve(f0, tables, cfg)?.trajectory;
    let mut gaps = Vec::with_capacity(halvings);
    for h in 1..=halvings {
        let c = SolverConfig { dt: cfg.dt / 2f64.powi(h as i32), ..*cfg };
        let next = direct_solve(f0, tables, &c)?.trajectory;
        gaps.push(trajectory_gap(&prev, &next, w)?);
        prev = next;
    }
    Ok(gaps)
}

/// Observed order from gaps of successive halvings:
/// least-squares slope of `-log₂ gap` against the halving level.
pub fn richardson_slope(gaps: &[f64]) -> f64 {
    let n = gaps.len() as f64;
    let xs: Vec<f64> = (0..gaps.len()).map(|i| i as f64).collect();
    let ys: Vec<f64> = gaps.iter().map(|g| -g.log2()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Repeated time marching on one grid without per-step diagnostics; the
/// operators are built once and shared by every call to [`Evolver::run`].
pub struct Evolver<'a> {
    eng: Engine<'a>,
    cfg: SolverConfig,
}

impl<'a> Evolver<'a> {
    pub fn new(grid: &FourierGrid, tables: &'a CollisionTables, cfg: &SolverConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self { eng: Engine::new(grid, tables, cfg.dt)?, cfg: *cfg })
    }

    /// Same scheme as [`direct_solve`]; returns the snapshots only.
    pub fn run(&self, f0: &SpectralField) -> Result<DistributionTrajectory> {
        let tables = self.eng.tables;
        if f0.n_vel() != tables.len() {
            return Err(Error::GridMismatch(format!("f0 has {} rows, tables {}", f0.n_vel(), tables.len())));
        }
        let (steps, stride) = (self.cfg.steps(), self.cfg.snapshot_stride());
        let target = self.eng.mean_invariants(f0);
        let (mut times, mut snaps) = (Vec::new(), Vec::new());
        let mut f = f0.clone();
        for n in 0..=steps {
            let t = n as f64 * self.cfg.dt;
            check_finite(&f, n, t)?;
            if n % stride == 0 || n == steps {
                times.push(t);
                snaps.push(f.clone());
            }
            if n < steps {
                let (rhs, _) = self.eng.full_rhs(&f);
                f = self.eng.prop.step(&f, &rhs)?;
                self.eng.restore_mean_invariants(&mut f, &target);
            }
        }
        DistributionTrajectory::new(times, snaps, Some(tables.velocity_grid().clone()))
    }
}
