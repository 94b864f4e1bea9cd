//! Energy functional `𝓔_T`, dissipation rates `𝓓_T`, `𝓓̃_T` and their sums.

use serde::{Deserialize, Serialize};

use crate::collision::CollisionTables;
use crate::error::{Error, Result};
use crate::lp::{DyadicSystem, SpectralField};
use crate::macroscopic::MomentOperators;
use crate::norms::besov::DistributionTrajectory;

/// Regularity of the energy space `B^{3/2}_{2,1}`.
pub const ENERGY_INDEX: f64 = 1.5;
/// Regularity of `∇_x(a, b, c)` in the dissipation.
pub const MACRO_DISSIPATION_INDEX: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EnergyFunctionals {
    pub e_t: f64,
    pub d_t: f64,
    pub d_tilde_t: f64,
    pub y_t: f64,
    pub y_tilde_t: f64,
    /// `‖∇_x(a, b, c)‖_{L̃²_T(B^{1/2})}`, the macroscopic part of `𝓓_T`.
    pub d_macro: f64,
    /// `‖{I-P}f‖_{L̃²_T L̃²_{ξ,ν}(B^{3/2})}`, the microscopic part of `𝓓_T`.
    pub d_micro: f64,
}

/// Squared block norms of one snapshot, indexed like `DyadicSystem::blocks`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockPowers {
    /// `‖Δ_q f‖²_{L²_ξ L²_x}`.
    pub energy: Vec<f64>,
    /// `‖Δ_q ∇_x(a, b, c)‖²_{L²_x}`.
    pub macro_gradient: Vec<f64>,
    /// `‖Δ_q {I-P} f‖²_{L²_{ξ,ν} L²_x}`.
    pub micro_nu: Vec<f64>,
    /// `‖Δ_q f‖²_{L²_{ξ,ν} L²_x}`.
    pub total_nu: Vec<f64>,
}

impl BlockPowers {
    /// `Σ_q 2^{3q/2} ‖Δ_q f‖`, the instantaneous energy `𝓔(f(t))`.
    pub fn energy_norm(&self, sys: &DyadicSystem) -> f64 {
        sys.blocks().zip(&self.energy).map(|(q, e)| weight(q, ENERGY_INDEX) * e.sqrt()).sum()
    }

    /// Instantaneous dissipation rate `Σ_q 2^{q/2}‖Δ_q∇(a,b,c)‖ + 2^{3q/2}‖Δ_q{I-P}f‖_ν`.
    pub fn dissipation_norm(&self, sys: &DyadicSystem) -> f64 {
        sys.blocks()
            .enumerate()
            .map(|(i, q)| {
                weight(q, MACRO_DISSIPATION_INDEX) * self.macro_gradient[i].sqrt()
                    + weight(q, ENERGY_INDEX) * self.micro_nu[i].sqrt()
            })
            .sum()
    }
}

fn weight(q: i32, s: f64) -> f64 {
    2f64.powf(q as f64 * s)
}

/// Per-mode power summed against block multipliers, via Parseval.
fn block_sums(sys: &DyadicSystem, per_mode: &[f64], vol: f64) -> Result<Vec<f64>> {
    sys.blocks()
        .map(|q| {
            let m = sys.block_multiplier(q)?;
            Ok(vol * per_mode.iter().zip(m.iter()).map(|(p, w)| p * w * w).sum::<f64>())
        })
        .collect()
}

/// Evaluates the block powers of one snapshot on the velocity grid of `tables`.
pub fn block_powers(
    sys: &DyadicSystem,
    ops: &MomentOperators,
    tables: &CollisionTables,
    f: &SpectralField,
) -> Result<BlockPowers> {
    sys.grid().ensure_same(&f.grid)?;
    if f.n_vel() != tables.len() {
        return Err(Error::GridMismatch(format!("field has {} rows, tables {}", f.n_vel(), tables.len())));
    }
    let grid = &f.grid;
    let modes = grid.len();
    let w = tables.velocity_grid().weight();
    let nu = tables.nu();
    let (coeffs, _, micro) = ops.project(f)?;
    let mut pe = vec![0.0; modes];
    let mut pt = vec![0.0; modes];
    let mut pm = vec![0.0; modes];
    for (r, &nr) in nu.iter().enumerate() {
        let row = f.values.row(r);
        let mrow = micro.values.row(r);
        for k in 0..modes {
            let a = row[k].norm_sqr();
            pe[k] += w * a;
            pt[k] += w * nr * a;
            pm[k] += w * nr * mrow[k].norm_sqr();
        }
    }
    let mut pg = vec![0.0; modes];
    for (k, g) in pg.iter_mut().enumerate() {
        if grid.is_nyquist(k) {
            continue;
        }
        let kv = grid.k_vec(k);
        let k2: f64 = (0..grid.dim()).map(|a| kv[a] * kv[a]).sum();
        *g = k2 * (0..5).map(|c| coeffs.fields.values[[c, k]].norm_sqr()).sum::<f64>();
    }
    let vol = grid.volume();
    Ok(BlockPowers {
        energy: block_sums(sys, &pe, vol)?,
        macro_gradient: block_sums(sys, &pg, vol)?,
        micro_nu: block_sums(sys, &pm, vol)?,
        total_nu: block_sums(sys, &pt, vol)?,
    })
}

/// Online accumulation of the functionals over a growing time window.
#[derive(Debug, Clone)]
pub struct EnergyAccumulator {
    blocks: Vec<i32>,
    sup_energy: Vec<f64>,
    int_gradient: Vec<f64>,
    int_micro: Vec<f64>,
    int_total: Vec<f64>,
    last: Option<(f64, BlockPowers)>,
}

impl EnergyAccumulator {
    pub fn new(sys: &DyadicSystem) -> Self {
        let blocks: Vec<i32> = sys.blocks().collect();
        let n = blocks.len();
        Self {
            blocks,
            sup_energy: vec![0.0; n],
            int_gradient: vec![0.0; n],
            int_micro: vec![0.0; n],
            int_total: vec![0.0; n],
            last: None,
        }
    }

    /// Adds the snapshot at time `t` (times must increase).
    pub fn push(&mut self, t: f64, p: BlockPowers) -> Result<()> {
        if p.energy.len() != self.blocks.len() {
            return Err(Error::Trajectory("block count changed".into()));
        }
        if let Some((t0, prev)) = &self.last {
            let h = t - t0;
            if h <= 0.0 {
                return Err(Error::Trajectory(format!("time {t} does not follow {t0}")));
            }
            for i in 0..self.blocks.len() {
                self.int_gradient[i] += 0.5 * h * (prev.macro_gradient[i] + p.macro_gradient[i]);
                self.int_micro[i] += 0.5 * h * (prev.micro_nu[i] + p.micro_nu[i]);
                self.int_total[i] += 0.5 * h * (prev.total_nu[i] + p.total_nu[i]);
            }
        }
        for (s, e) in self.sup_energy.iter_mut().zip(&p.energy) {
            *s = s.max(*e);
        }
        self.last = Some((t, p));
        Ok(())
    }

    pub fn functionals(&self) -> EnergyFunctionals {
        let mut f = EnergyFunctionals::default();
        for (i, &q) in self.blocks.iter().enumerate() {
            let (w1, w3) = (weight(q, MACRO_DISSIPATION_INDEX), weight(q, ENERGY_INDEX));
            f.e_t += w3 * self.sup_energy[i].sqrt();
            f.d_macro += w1 * self.int_gradient[i].sqrt();
            f.d_micro += w3 * self.int_micro[i].sqrt();
            f.d_tilde_t += w3 * self.int_total[i].sqrt();
        }
        f.d_t = f.d_macro + f.d_micro;
        f.y_t = f.e_t + f.d_t;
        f.y_tilde_t = f.e_t + f.d_tilde_t;
        f
    }
}

/// `𝓔_T`, `𝓓_T`, `𝓓̃_T`, `Y_T`, `Ỹ_T` over the whole trajectory.
pub fn energy_functionals(
    sys: &DyadicSystem,
    traj: &DistributionTrajectory,
    tables: &CollisionTables,
) -> Result<EnergyFunctionals> {
    let ops = MomentOperators::new(tables.velocity_grid());
    let mut acc = EnergyAccumulator::new(sys);
    for (t, f) in traj.times().iter().zip(traj.fields()) {
        acc.push(*t, block_powers(sys, &ops, tables, f)?)?;
    }
    Ok(acc.functionals())
}
