//! One grid resolution of the harness and the norms its checks need.

use std::collections::HashMap;
use std::sync::Mutex;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::collision::{
    apply_matrix, build_tables, CollisionTables, KernelParams, PolynomialBasis, SphereQuadrature, VelocityGrid,
};
use crate::error::{Error, Result};
use crate::lp::{Dealiaser, DyadicSystem, FourierGrid, SpectralField, DEFAULT_SHARPNESS};
use crate::macroscopic::MomentOperators;
use crate::norms::{chemin_lerner_norm, EnergyFunctionals, trapezoid_weights, weighted_lp, BesovSpec, CLSpec, DistributionTrajectory};

/// Points per axis in `x` and in `ξ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelSpec {
    pub x_points: usize,
    pub v_points: usize,
}

/// Base and doubled resolutions for the refinement rerun.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyGrids {
    pub dim: usize,
    pub half_width: f64,
    pub sphere_nodes: usize,
    pub base: LevelSpec,
    /// `None` skips the refinement rerun.
    pub doubled: Option<LevelSpec>,
}

impl Default for VerifyGrids {
    fn default() -> Self {
        Self {
            dim: 1,
            half_width: VelocityGrid::DEFAULT_HALF_WIDTH,
            sphere_nodes: SphereQuadrature::DEFAULT_NODES,
            base: LevelSpec { x_points: 8, v_points: 8 },
            doubled: Some(LevelSpec { x_points: 16, v_points: 16 }),
        }
    }
}

/// Grids, tables and cached operators of one resolution.
pub struct Level {
    pub spec: LevelSpec,
    pub grid: FourierGrid,
    pub sys: DyadicSystem,
    pub tables: CollisionTables,
    pub ops: MomentOperators,
    /// Galerkin basis; fields in its span get an exact `Γ`.
    pub basis: PolynomialBasis,
    /// Wider basis for the linear checks.
    pub rich_basis: PolynomialBasis,
    dealiaser: Dealiaser,
    /// `(n_v, M)` basis values.
    phi: Array2<f64>,
    /// `A Φ`, the loss frequencies of the basis functions.
    a_phi: Array2<f64>,
    /// `(M, n_v)` weighted transpose of `phi`.
    analysis: Array2<f64>,
    /// `L Φ`, shape `(n_v, M)`.
    l_phi: Array2<f64>,
    /// `(M, M²)`: `(φ_a, Γ(φ_b, φ_c))` at column `b·M + c`.
    gamma_coef: Array2<f64>,
    /// `(12, M)` moments `Θ`, `Λ` of the basis functions.
    moment_phi: Array2<f64>,
    /// `(f₀ energy, functionals)` of solver runs, keyed by run parameters and trial.
    runs: Mutex<HashMap<String, (f64, EnergyFunctionals)>>,
}

/// Polynomial degree of the wider basis.
pub const RICH_DEGREE: usize = 6;

impl Level {
    pub fn build(grids: &VerifyGrids, spec: LevelSpec, kernel: &KernelParams) -> Result<Self> {
        let vg = VelocityGrid::new(grids.half_width, spec.v_points)?;
        let sph = SphereQuadrature::fibonacci(grids.sphere_nodes)?;
        let tables = build_tables(&vg, &sph, kernel)?;
        Self::new(FourierGrid::new(grids.dim, spec.x_points)?, tables, spec)
    }

    pub fn new(grid: FourierGrid, tables: CollisionTables, spec: LevelSpec) -> Result<Self> {
        let vg = tables.velocity_grid().clone();
        if vg.points_per_axis() != spec.v_points || grid.points_per_axis() != spec.x_points {
            return Err(Error::GridMismatch("level spec does not match grids".into()));
        }
        let ops = MomentOperators::new(&vg);
        let basis = tables.galerkin().basis().clone();
        let m = basis.len();
        let phi = Array2::from_shape_fn((vg.len(), m), |(r, a)| basis.vectors()[a][r]);
        let analysis = phi.t().mapv(|v| v * vg.weight());
        let a_phi = tables.loss_matrix().dot(&phi);
        let mut l_phi = tables.k_matrix().dot(&phi);
        for ((r, a), v) in l_phi.indexed_iter_mut() {
            *v = tables.nu()[r] * phi[[r, a]] - *v;
        }
        // loss part (φ_a, φ_c·(A φ_b)) assembled beside the Galerkin gain
        let mut gamma_coef = analysis.dot(tables.galerkin().tensor());
        for a in 0..m {
            for b in 0..m {
                for c in 0..m {
                    let s: f64 = (0..vg.len()).map(|r| analysis[[a, r]] * a_phi[[r, b]] * phi[[r, c]]).sum();
                    gamma_coef[[a, b * m + c]] -= s;
                }
            }
        }
        let moment_phi = ops.moment_matrix().dot(&phi);
        Ok(Self {
            spec,
            sys: DyadicSystem::new(&grid, DEFAULT_SHARPNESS)?,
            dealiaser: Dealiaser::new(&grid),
            ops,
            rich_basis: PolynomialBasis::new(&vg, RICH_DEGREE),
            basis,
            phi,
            a_phi,
            analysis,
            l_phi,
            gamma_coef,
            moment_phi,
            runs: Mutex::new(HashMap::new()),
            grid,
            tables,
        })
    }

    pub fn velocity(&self) -> &VelocityGrid {
        self.tables.velocity_grid()
    }

    pub fn weight(&self) -> f64 {
        self.velocity().weight()
    }

    /// `Γ(f, g) = Γ_gain - Γ_loss` for fields in the span of [`Self::basis`],
    /// with the gain from the Galerkin tensor and no invariant projection.
    pub fn gamma(&self, f: &SpectralField, g: &SpectralField) -> SpectralField {
        let cf = self.dealiaser.rows_to_padded(&apply_matrix(&self.analysis, f));
        let cg = self.dealiaser.rows_to_padded(&apply_matrix(&self.analysis, g));
        let mut out = self.tables.galerkin().gain_from_coefficients(cf.view(), cg.view());
        let loss = self.a_phi.dot(&cf) * self.phi.dot(&cg);
        out -= &loss;
        let mut res = self.dealiaser.rows_from_padded(&out);
        res.real = true;
        res
    }

    /// Basis coefficients `(φ_a, f)_ξ`, one row per basis function.
    pub fn coefficients(&self, f: &SpectralField) -> SpectralField {
        apply_matrix(&self.analysis, f)
    }

    /// `(φ_a, Γ(f, g))_ξ` for `f`, `g` in the span of [`Self::basis`]: the
    /// coefficients of [`Self::gamma`] without forming it on the velocity grid.
    pub fn gamma_coefficients(&self, f: &SpectralField, g: &SpectralField) -> SpectralField {
        let cf = self.dealiaser.rows_to_padded(&self.coefficients(f));
        let cg = self.dealiaser.rows_to_padded(&self.coefficients(g));
        let m = self.basis.len();
        let cols = cf.ncols();
        let mut outer = Array2::zeros((m * m, cols));
        for a in 0..m {
            for b in 0..m {
                let mut row = outer.row_mut(a * m + b);
                for c in 0..cols {
                    row[c] = cf[[a, c]] * cg[[b, c]];
                }
            }
        }
        let mut res = self.dealiaser.rows_from_padded(&self.gamma_coef.dot(&outer));
        res.real = true;
        res
    }

    /// `Θ`, `Λ` rows of `Γ(f, g)` for `f`, `g` in the span; exact because
    /// every moment function lies in the span as well.
    pub fn gamma_moments(&self, f: &SpectralField, g: &SpectralField) -> SpectralField {
        apply_matrix(&self.moment_phi, &self.gamma_coefficients(f, g))
    }

    /// `Σ_q 2^{qs} [∫ |(Δ_q Γ(f, g), Δ_q h)| dt]^{1/2}` for trajectories in the
    /// span. Agrees with [`Self::block_pairing`] of [`Self::gamma_traj`].
    pub fn gamma_pairing(&self, f: &DistributionTrajectory, g: &DistributionTrajectory, h: &DistributionTrajectory, s: f64) -> Result<f64> {
        let a: Vec<SpectralField> = f.fields().iter().zip(g.fields()).map(|(x, y)| self.gamma_coefficients(x, y)).collect();
        let b: Vec<SpectralField> = h.fields().iter().map(|x| self.coefficients(x)).collect();
        self.pairing(f.times(), &a, &b, s, 1.0)
    }

    /// `L f` for `f` in the span of [`Self::basis`], from `L Φ` and the
    /// basis coefficients of `f`.
    pub fn apply_l_in_span(&self, f: &SpectralField) -> SpectralField {
        apply_matrix(&self.l_phi, &apply_matrix(&self.analysis, f))
    }

    /// Cached solver summary for `key`, computed by `run` on first use.
    pub(crate) fn run_summary(
        &self,
        key: String,
        run: impl FnOnce() -> Result<(f64, EnergyFunctionals)>,
    ) -> Result<(f64, EnergyFunctionals)> {
        if let Some(v) = self.runs.lock().expect("run cache").get(&key) {
            return Ok(*v);
        }
        let v = run()?;
        self.runs.lock().expect("run cache").insert(key, v);
        Ok(v)
    }

    pub fn trajectory(&self, times: &[f64], fields: Vec<SpectralField>) -> Result<DistributionTrajectory> {
        DistributionTrajectory::new(times.to_vec(), fields, Some(self.velocity().clone()))
    }

    /// Applies `op` to every snapshot.
    pub fn map(
        &self,
        traj: &DistributionTrajectory,
        op: impl Fn(&SpectralField) -> Result<SpectralField>,
    ) -> Result<DistributionTrajectory> {
        let fields = traj.fields().iter().map(op).collect::<Result<Vec<_>>>()?;
        DistributionTrajectory::new(traj.times().to_vec(), fields, traj.velocity().cloned())
    }

    pub fn gamma_traj(&self, f: &DistributionTrajectory, g: &DistributionTrajectory) -> Result<DistributionTrajectory> {
        let fields = f.fields().iter().zip(g.fields()).map(|(a, b)| self.gamma(a, b)).collect();
        DistributionTrajectory::new(f.times().to_vec(), fields, f.velocity().cloned())
    }

    /// `(P f, {I-P} f)` snapshot by snapshot.
    pub fn split(&self, traj: &DistributionTrajectory) -> Result<(DistributionTrajectory, DistributionTrajectory)> {
        Ok((self.map(traj, |f| Ok(self.ops.project(f)?.1))?, self.map(traj, |f| Ok(self.ops.project(f)?.2))?))
    }

    /// `‖f‖_{L̃^{ρ}_T L̃²_{ξ(,ν)}(B^s_{2,1})}`, homogeneous blocks if `homogeneous`.
    pub fn cl(&self, traj: &DistributionTrajectory, rho: f64, s: f64, nu: bool, homogeneous: bool) -> Result<f64> {
        let mut b = BesovSpec::critical(s);
        if homogeneous {
            b = b.homogeneous();
        }
        let mut spec = CLSpec::new(rho, 2.0, b);
        if nu {
            spec = spec.weighted();
        }
        chemin_lerner_norm(&self.sys, traj, &spec, Some(&self.tables))
    }

    /// `‖f‖_{L^{ρ}_T L²_{ξ(,ν)} L^∞_x}` with the sup over grid points.
    pub fn sup_norm(&self, traj: &DistributionTrajectory, rho: f64, nu: bool) -> f64 {
        let w = self.weight();
        let freq = self.tables.nu();
        let per_t: Vec<f64> = traj
            .fields()
            .iter()
            .map(|f| {
                let phys = f.to_physical();
                let s: f64 = phys
                    .rows()
                    .into_iter()
                    .zip(freq)
                    .map(|(row, &n)| {
                        let m = row.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                        if nu { n * m * m } else { m * m }
                    })
                    .sum();
                (w * s).sqrt()
            })
            .collect();
        weighted_lp(&per_t, &trapezoid_weights(traj.times()), rho)
    }

    /// `(Δ_q a, Δ_q b)_{x,ξ}` per nonhomogeneous block.
    pub fn block_inner(&self, a: &SpectralField, b: &SpectralField) -> Result<Vec<f64>> {
        self.block_inner_weighted(a, b, self.weight())
    }

    /// Block inner products with velocity weight `w` (1 for coefficient rows).
    fn block_inner_weighted(&self, a: &SpectralField, b: &SpectralField, w: f64) -> Result<Vec<f64>> {
        let vol = self.grid.volume() * w;
        let mut cross = vec![0.0; self.grid.len()];
        for (ra, rb) in a.values.rows().into_iter().zip(b.values.rows()) {
            for ((c, x), y) in cross.iter_mut().zip(ra).zip(rb) {
                *c += (x * y.conj()).re;
            }
        }
        self.sys
            .blocks()
            .map(|q| {
                let m = self.sys.block_multiplier(q)?;
                Ok(vol * cross.iter().zip(m).map(|(c, w)| c * w * w).sum::<f64>())
            })
            .collect()
    }

    /// `Σ_q 2^{qs} [∫ |(Δ_q a, Δ_q b)| dt]^{1/2}`.
    pub fn block_pairing(&self, a: &DistributionTrajectory, b: &DistributionTrajectory, s: f64) -> Result<f64> {
        self.pairing(a.times(), a.fields(), b.fields(), s, self.weight())
    }

    fn pairing(&self, times: &[f64], a: &[SpectralField], b: &[SpectralField], s: f64, w: f64) -> Result<f64> {
        let tw = trapezoid_weights(times);
        let per_t: Vec<Vec<f64>> =
            a.iter().zip(b).map(|(x, y)| self.block_inner_weighted(x, y, w)).collect::<Result<_>>()?;
        Ok(self
            .sys
            .blocks()
            .enumerate()
            .map(|(i, q)| {
                let integral: f64 = per_t.iter().zip(&tw).map(|(v, w)| w * v[i].abs()).sum();
                2f64.powf(q as f64 * s) * integral.sqrt()
            })
            .sum())
    }
}
