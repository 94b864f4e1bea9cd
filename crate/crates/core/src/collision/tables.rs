//! Assembly of `ν`, `K₁`, `K₂` and the linearised operator on a velocity grid.

use std::sync::OnceLock;

use ndarray::{Array1, Array2, ArrayView1, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::collision::basis::InvariantBasis;
use crate::collision::gamma::GalerkinTensor;
use crate::collision::quadrature::{dot, KernelParams, SphereQuadrature, VelocityGrid};
use crate::collision::stencil::{scatter, Interpolation, PaddedLattice, StencilTable};
use crate::error::{Error, Result};

/// Construction options beyond the grids and kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct TableOptions {
    pub interpolation: Interpolation,
}

/// Quadrature-consistency measurements taken while building the tables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct TableDiagnostics {
    /// Share of post-collision stencil weight with a corner outside the box.
    pub clipped_fraction: f64,
    /// `‖K₂ - K₂ᵀ‖_F / ‖K₂‖_F` of the scattered gain kernel.
    pub k2_asymmetry: f64,
    /// `‖L_raw ψ‖ / ‖ν ψ‖` for `ψ ∈ {√μ, ξ₁√μ, ξ₂√μ, ξ₃√μ, (|ξ|²-3)√μ}`
    /// before the conservative correction.
    pub raw_kernel_defect: [f64; 5],
}

/// Precomputed collision data for one `(velocity grid, sphere rule, kernel)`.
///
/// `k_matrix` is the corrected operator `K = ν - Q L_s Q`, where `L_s` is the
/// symmetric part of the scattered `ν - K₂ + K₁` and `Q = I - P` the exact
/// grid projection off the collision invariants.
#[derive(Debug)]
pub struct CollisionTables {
    pub(crate) vgrid: VelocityGrid,
    pub(crate) sphere: SphereQuadrature,
    pub(crate) kernel: KernelParams,
    pub(crate) options: TableOptions,
    pub(crate) nu: Vec<f64>,
    /// `A[i][j] = |ξ_i-ξ_j|^γ (∫B₀dω) w μ^{1/2}(ξ_j)`; `Γ_loss(f,g) = g·(A f)`.
    pub(crate) loss: Array2<f64>,
    pub(crate) k2_raw: Array2<f64>,
    pub(crate) k_matrix: Array2<f64>,
    pub(crate) invariants: InvariantBasis,
    pub(crate) stencils: StencilTable,
    pub(crate) diagnostics: TableDiagnostics,
    pub(crate) galerkin: OnceLock<GalerkinTensor>,
}

/// Builds the tables with default options.
pub fn build_tables(vgrid: &VelocityGrid, sph: &SphereQuadrature, kp: &KernelParams) -> Result<CollisionTables> {
    build_tables_with(vgrid, sph, kp, TableOptions::default())
}

pub fn build_tables_with(
    vgrid: &VelocityGrid,
    sph: &SphereQuadrature,
    kp: &KernelParams,
    options: TableOptions,
) -> Result<CollisionTables> {
    kp.validate()?;
    if sph.is_empty() {
        return Err(Error::InvalidParameter("empty sphere rule".into()));
    }
    let n_v = vgrid.len();
    let loss = loss_matrix(vgrid, kp);
    let sm = vgrid.sqrt_mu();
    let nu: Vec<f64> = loss.dot(&ArrayView1::from(sm)).to_vec();

    let stencils = StencilTable::build(vgrid, sph, kp, options.interpolation);
    let (k2_raw, clipped_fraction) = assemble_k2(vgrid, &stencils);

    let mut l = k2_raw.mapv(|v| -v);
    for i in 0..n_v {
        for j in 0..n_v {
            l[[i, j]] += sm[i] * loss[[i, j]];
        }
        l[[i, i]] += nu[i];
    }
    let invariants = InvariantBasis::new(vgrid);
    let mut raw_kernel_defect = [0.0; 5];
    for (d, g) in raw_kernel_defect.iter_mut().zip(invariants.generators()) {
        let lg = l.dot(&ArrayView1::from(g.as_slice()));
        let ng: f64 = g.iter().zip(&nu).map(|(x, v)| (x * v).powi(2)).sum::<f64>().sqrt();
        *d = lg.dot(&lg).sqrt() / ng;
    }

    let k2_asymmetry = {
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..n_v {
            for j in 0..n_v {
                num += (k2_raw[[i, j]] - k2_raw[[j, i]]).powi(2);
                den += k2_raw[[i, j]].powi(2);
            }
        }
        (num / den).sqrt()
    };

    let l_sym = (&l + &l.t()) * 0.5;
    drop(l);
    let l_c = conservative(&l_sym, &invariants, vgrid.weight());
    let mut k_matrix = l_c.mapv(|v| -v);
    for i in 0..n_v {
        k_matrix[[i, i]] += nu[i];
    }

    Ok(CollisionTables {
        vgrid: vgrid.clone(),
        sphere: sph.clone(),
        kernel: *kp,
        options,
        nu,
        loss,
        k2_raw,
        k_matrix,
        invariants,
        stencils,
        diagnostics: TableDiagnostics { clipped_fraction, k2_asymmetry, raw_kernel_defect },
        galerkin: OnceLock::new(),
    })
}

pub(crate) fn loss_matrix(vgrid: &VelocityGrid, kp: &KernelParams) -> Array2<f64> {
    let n_v = vgrid.len();
    let nodes = vgrid.nodes();
    let sm = vgrid.sqrt_mu();
    let c = kp.angular_mass() * vgrid.weight();
    let mut a = Array2::zeros((n_v, n_v));
    a.axis_iter_mut(Axis(0)).into_par_iter().enumerate().for_each(|(i, mut row)| {
        for j in 0..n_v {
            row[j] = c * sm[j] * relative_speed(nodes[i], nodes[j], kp.gamma);
        }
    });
    a
}

fn relative_speed(a: [f64; 3], b: [f64; 3], gamma: f64) -> f64 {
    let u = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    let s = dot(u, u);
    if gamma == 0.0 {
        1.0
    } else if gamma == 1.0 {
        s.sqrt()
    } else {
        s.powf(0.5 * gamma)
    }
}

/// Scatters the gain stencils into `K₂[i][c]`, interpolating `f/μ^{1/2}`.
fn assemble_k2(vgrid: &VelocityGrid, st: &StencilTable) -> (Array2<f64>, f64) {
    let n = vgrid.points_per_axis();
    let n_v = vgrid.len();
    let sm = vgrid.sqrt_mu();
    let pl = PaddedLattice::new(n, st.reach());
    let strides = pl.strides();
    let rows: Vec<(Vec<f64>, f64, f64)> = (0..n_v)
        .into_par_iter()
        .map(|i| {
            let ci = vgrid.coords(i);
            let mut buf = vec![0.0; pl.len()];
            let (mut total, mut clipped) = (0.0, 0.0);
            for j in 0..n_v {
                let cj = vgrid.coords(j);
                let base = sm[i] * sm[j] * sm[j];
                for s in st.for_offset(ci, cj) {
                    let w = base * s.weight;
                    if w == 0.0 {
                        continue;
                    }
                    scatter(&mut buf, pl.index(cj, s.star_base), strides, &s.star_w, w);
                    scatter(&mut buf, pl.index(ci, s.prime_base), strides, &s.prime_w, w);
                    total += 2.0 * w;
                    if !pl.inside(cj, s.star_base, &s.star_w) {
                        clipped += w;
                    }
                    if !pl.inside(ci, s.prime_base, &s.prime_w) {
                        clipped += w;
                    }
                }
            }
            let row: Vec<f64> = (0..n_v).map(|c| buf[pl.index(vgrid.coords(c), [0, 0, 0])] / sm[c]).collect();
            (row, total, clipped)
        })
        .collect();
    let mut k2 = Array2::zeros((n_v, n_v));
    let (mut total, mut clipped) = (0.0, 0.0);
    for (i, (row, t, c)) in rows.into_iter().enumerate() {
        k2.row_mut(i).assign(&Array1::from(row));
        total += t;
        clipped += c;
    }
    (k2, if total > 0.0 { clipped / total } else { 0.0 })
}

/// `Q L Q` with `Q = I - Σ_k w e_k e_kᵀ`, for symmetric `L`.
fn conservative(l: &Array2<f64>, basis: &InvariantBasis, w: f64) -> Array2<f64> {
    let n_v = l.nrows();
    let e = Array2::from_shape_fn((n_v, 5), |(i, k)| basis.vectors()[k][i]);
    let le = l.dot(&e) * w;
    let ele = e.t().dot(&le) * w;
    let e_ele = e.dot(&ele);
    let mut out = l.clone();
    out.axis_iter_mut(Axis(0)).into_par_iter().enumerate().for_each(|(i, mut row)| {
        for j in 0..n_v {
            let mut s = 0.0;
            for k in 0..5 {
                s += le[[i, k]] * e[[j, k]] + e[[i, k]] * le[[j, k]] - e[[i, k]] * e_ele[[j, k]];
            }
            row[j] -= s;
        }
    });
    out
}

impl CollisionTables {
    pub fn velocity_grid(&self) -> &VelocityGrid {
        &self.vgrid
    }

    pub fn sphere(&self) -> &SphereQuadrature {
        &self.sphere
    }

    pub fn kernel(&self) -> &KernelParams {
        &self.kernel
    }

    pub fn options(&self) -> &TableOptions {
        &self.options
    }

    /// `ν` at every node.
    pub fn nu(&self) -> &[f64] {
        &self.nu
    }

    /// Collision frequency at an arbitrary velocity, by the same quadrature.
    pub fn nu_at(&self, v: [f64; 3]) -> f64 {
        let c = self.kernel.angular_mass() * self.vgrid.weight();
        self.vgrid
            .nodes()
            .iter()
            .zip(self.vgrid.sqrt_mu())
            .map(|(&x, s)| c * s * s * relative_speed(v, x, self.kernel.gamma))
            .sum()
    }

    /// The corrected `K = K₂ - K₁` (symmetric, annihilates nothing).
    pub fn k_matrix(&self) -> &Array2<f64> {
        &self.k_matrix
    }

    /// `K₂` as scattered from the interpolation stencils, before any
    /// symmetrisation or correction.
    pub fn k2_raw(&self) -> &Array2<f64> {
        &self.k2_raw
    }

    /// `K₁[i][j] = μ^{1/2}(ξ_i) A[i][j]`.
    pub fn k1_matrix(&self) -> Array2<f64> {
        let sm = self.vgrid.sqrt_mu();
        let mut k1 = self.loss.clone();
        for (i, mut row) in k1.axis_iter_mut(Axis(0)).enumerate() {
            row.mapv_inplace(|v| v * sm[i]);
        }
        k1
    }

    /// Loss-kernel matrix `A` with `Γ_loss(f, g) = g · (A f)`.
    pub fn loss_matrix(&self) -> &Array2<f64> {
        &self.loss
    }

    pub fn invariants(&self) -> &InvariantBasis {
        &self.invariants
    }

    pub fn stencils(&self) -> &StencilTable {
        &self.stencils
    }

    pub fn diagnostics(&self) -> &TableDiagnostics {
        &self.diagnostics
    }

    pub fn len(&self) -> usize {
        self.nu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nu.is_empty()
    }

    pub(crate) fn check_len(&self, f: &[f64]) -> Result<()> {
        if f.len() != self.len() {
            return Err(Error::GridMismatch(format!("{} velocity values for a {}-node grid", f.len(), self.len())));
        }
        Ok(())
    }

    /// `K f`.
    pub fn apply_k(&self, f: &[f64]) -> Result<Vec<f64>> {
        self.check_len(f)?;
        Ok(self.k_matrix.dot(&ArrayView1::from(f)).to_vec())
    }

    /// `ν f`.
    pub fn apply_nu(&self, f: &[f64]) -> Result<Vec<f64>> {
        self.check_len(f)?;
        Ok(f.iter().zip(&self.nu).map(|(a, b)| a * b).collect())
    }

    /// Uncorrected `ν f - K₂ f + K₁ f` straight from the stencils.
    pub fn apply_l_raw(&self, f: &[f64]) -> Result<Vec<f64>> {
        self.check_len(f)?;
        let fv = ArrayView1::from(f);
        let k2 = self.k2_raw.dot(&fv);
        let af = self.loss.dot(&fv);
        let sm = self.vgrid.sqrt_mu();
        Ok((0..self.len()).map(|i| self.nu[i] * f[i] - k2[i] + sm[i] * af[i]).collect())
    }

    /// `(f, g)` with the velocity quadrature.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        self.vgrid.inner(f, g)
    }

    /// `(ν f, f)`.
    pub fn nu_norm_sq(&self, f: &[f64]) -> f64 {
        f.iter().zip(&self.nu).map(|(x, v)| v * x * x).sum::<f64>() * self.vgrid.weight()
    }

    /// Galerkin tensor for `Γ_gain`, built on first use.
    pub fn galerkin(&self) -> &GalerkinTensor {
        self.galerkin.get_or_init(|| GalerkinTensor::build(self, crate::collision::PolynomialBasis::DEFAULT_DEGREE))
    }
}

/// `L f = ν f - K f`.
pub fn apply_l(tables: &CollisionTables, f: &[f64]) -> Result<Vec<f64>> {
    let kf = tables.apply_k(f)?;
    Ok(f.iter().zip(&tables.nu).zip(kf).map(|((x, v), k)| v * x - k).collect())
}
