use serde::{Deserialize, Serialize};

use crate::collision::CollisionTables;
use crate::error::{Error, Result};
use crate::lp::SpectralField;
use crate::norms::{energy_functionals, DistributionTrajectory};
use crate::solver::config::{LossCoupling, SolverConfig};
use crate::solver::engine::{check_finite, Engine};

/// Iterates `f^{n-1}`, `f^n` on the Picard window, stored at every step.
#[derive(Debug, Clone)]
pub struct IterationState {
    pub n: usize,
    pub trajectory_prev: DistributionTrajectory,
    pub trajectory_curr: DistributionTrajectory,
    /// `Ỹ_T(f^m)` for `m = 0..=n`.
    pub ytilde_history: Vec<f64>,
    /// `Ỹ_T(f^{m+1} - f^m)` for `m = 0..n`.
    pub difference_history: Vec<f64>,
}

/// `f^0(t) = f₀` on `[0, T*]`.
pub fn picard_start(f0: &SpectralField, tables: &CollisionTables, cfg: &SolverConfig) -> Result<IterationState> {
    cfg.validate()?;
    if f0.n_vel() != tables.len() {
        return Err(Error::GridMismatch(format!("f0 has {} rows, tables {}", f0.n_vel(), tables.len())));
    }
    let steps = cfg.steps_for(cfg.picard_window);
    let times: Vec<f64> = (0..=steps).map(|m| m as f64 * cfg.dt).collect();
    let traj = DistributionTrajectory::new(times, vec![f0.clone(); steps + 1], Some(tables.velocity_grid().clone()))?;
    let eng = Engine::new(&f0.grid, tables, cfg.dt)?;
    let y0 = energy_functionals(&eng.sys, &traj, tables)?.y_tilde_t;
    Ok(IterationState {
        n: 0,
        trajectory_prev: traj.clone(),
        trajectory_curr: traj,
        ytilde_history: vec![y0],
        difference_history: Vec::new(),
    })
}

/// Solves `{∂_t + ξ·∇_x + ν} f^{n+1} = K f^n + Γ_gain(f^n, f^n) - Γ_loss(f^n, f^{n+1})`
/// on the window of `state` and records `Ỹ_T(f^{n+1})`.
pub fn picard_sweep(state: &IterationState, tables: &CollisionTables, cfg: &SolverConfig) -> Result<IterationState> {
    let cur = &state.trajectory_curr;
    let f0 = &cur.fields()[0];
    let eng = Engine::new(&f0.grid, tables, cfg.dt)?;
    let n_next = state.n + 1;
    let mut out = Vec::with_capacity(cur.len());
    let mut g = f0.clone();
    out.push(g.clone());
    for (m, fm) in cur.fields()[..cur.len() - 1].iter().enumerate() {
        let c = eng.columns(fm);
        let mut base = eng.gain(&c.f, &c.f);
        base += &c.kf;
        let rhs_with = |gp: &ndarray::Array2<f64>| {
            let mut r = base.clone();
            r.zip_mut_with(&(&c.af * gp), |v, l| *v -= l);
            eng.to_spectral(&r)
        };
        let mut next = eng.prop.step(&g, &rhs_with(&eng.padded(&g)))?;
        if cfg.loss_coupling == LossCoupling::Implicit {
            for _ in 0..cfg.implicit_iterations {
                next = eng.prop.step(&g, &rhs_with(&eng.padded(&next)))?;
            }
        }
        check_finite(&next, n_next, cur.times()[m + 1])?;
        g = next;
        out.push(g.clone());
    }
    let traj = DistributionTrajectory::new(cur.times().to_vec(), out, cur.velocity().cloned())?;
    let y = energy_functionals(&eng.sys, &traj, tables)?.y_tilde_t;
    let diff = energy_functionals(&eng.sys, &traj.combine(1.0, cur, -1.0)?, tables)?.y_tilde_t;
    if !(y.is_finite() && diff.is_finite()) {
        return Err(Error::Diverged { n: n_next, t: cur.horizon() });
    }
    let mut ytilde_history = state.ytilde_history.clone();
    ytilde_history.push(y);
    let mut difference_history = state.difference_history.clone();
    difference_history.push(diff);
    Ok(IterationState {
        n: n_next,
        trajectory_prev: cur.clone(),
        trajectory_curr: traj,
        ytilde_history,
        difference_history,
    })
}

/// Summary of a Picard run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PicardReport {
    /// `Ỹ_T(f^n)`, `n = 0, 1, …`.
    pub ytilde: Vec<f64>,
    /// `Ỹ_T(f^{n+1} - f^n)`.
    pub differences: Vec<f64>,
    /// Successive ratios `Ỹ_T(f^{n+1} - f^n) / Ỹ_T(f^{n+2} - f^{n+1})`.
    pub contraction: Vec<f64>,
    /// `Ỹ_T(f^0)`, the bound `M₀` fitted to the data.
    pub m0: f64,
    pub window: f64,
}

/// Sweeps until the relative difference drops below `picard_tol` or
/// `picard_max` sweeps are done.
pub fn picard_iterate(f0: &SpectralField, tables: &CollisionTables, cfg: &SolverConfig) -> Result<(PicardReport, IterationState)> {
    let mut state = picard_start(f0, tables, cfg)?;
    for _ in 0..cfg.picard_max {
        state = picard_sweep(&state, tables, cfg)?;
        let (d, y) = (*state.difference_history.last().expect("one sweep"), *state.ytilde_history.last().expect("one"));
        if d <= cfg.picard_tol * y {
            break;
        }
    }
    let d = &state.difference_history;
    let report = PicardReport {
        ytilde: state.ytilde_history.clone(),
        differences: d.clone(),
        contraction: d.windows(2).map(|w| if w[1] > 0.0 { w[0] / w[1] } else { f64::INFINITY }).collect(),
        m0: state.ytilde_history[0],
        window: state.trajectory_curr.horizon(),
    };
    Ok((report, state))
}
