use ndarray::{concatenate, s, Array2, Axis};

use crate::collision::{remove_invariant_columns, CollisionTables, GalerkinTensor};
use crate::error::{Error, Result};
use crate::lp::{Dealiaser, DyadicSystem, FourierGrid, SpectralField, DEFAULT_SHARPNESS};
use crate::macroscopic::MomentOperators;
use crate::solver::propagator::Propagator;

/// Operators shared by all steps of one run.
pub(crate) struct Engine<'a> {
    pub tables: &'a CollisionTables,
    pub sys: DyadicSystem,
    pub ops: MomentOperators,
    pub prop: Propagator,
    dealiaser: Dealiaser,
    /// `[K; A]`, shape `(2 n_v, n_v)`.
    stacked: Array2<f64>,
    galerkin: &'a GalerkinTensor,
    sqrt_mu: Vec<f64>,
}

/// Padded physical columns of `f` with `K f` and `A f` on the same points.
pub(crate) struct Columns {
    pub f: Array2<f64>,
    pub kf: Array2<f64>,
    pub af: Array2<f64>,
}

impl<'a> Engine<'a> {
    pub fn new(grid: &FourierGrid, tables: &'a CollisionTables, dt: f64) -> Result<Self> {
        let stacked = concatenate(Axis(0), &[tables.k_matrix().view(), tables.loss_matrix().view()])
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        Ok(Self {
            tables,
            sys: DyadicSystem::new(grid, DEFAULT_SHARPNESS)?,
            ops: MomentOperators::new(tables.velocity_grid()),
            prop: Propagator::new(grid, tables, dt),
            dealiaser: Dealiaser::new(grid),
            stacked,
            galerkin: tables.galerkin(),
            sqrt_mu: tables.velocity_grid().sqrt_mu().to_vec(),
        })
    }

    pub fn columns(&self, f: &SpectralField) -> Columns {
        let fp = self.dealiaser.rows_to_padded(f);
        let both = self.stacked.dot(&fp);
        let n = fp.nrows();
        Columns { kf: both.slice(s![..n, ..]).to_owned(), af: both.slice(s![n.., ..]).to_owned(), f: fp }
    }

    /// Galerkin `Γ_gain(f, g)` on padded columns.
    pub fn gain(&self, f: &Array2<f64>, g: &Array2<f64>) -> Array2<f64> {
        self.galerkin.gain_columns(f.view(), g.view())
    }

    pub fn remove_invariants(&self, x: &mut Array2<f64>) {
        remove_invariant_columns(self.tables, x);
    }

    pub fn to_spectral(&self, x: &Array2<f64>) -> SpectralField {
        let mut out = self.dealiaser.rows_from_padded(x);
        out.real = true;
        out
    }

    pub fn padded(&self, f: &SpectralField) -> Array2<f64> {
        self.dealiaser.rows_to_padded(f)
    }

    /// `min_{x,ξ} (μ + μ^{1/2} f)` over padded points.
    pub fn positivity_margin(&self, fp: &Array2<f64>) -> f64 {
        let mut m = f64::INFINITY;
        for (row, &s) in fp.rows().into_iter().zip(&self.sqrt_mu) {
            for &v in row {
                m = m.min(s * (s + v));
            }
        }
        m
    }

    /// Right-hand side `K f + Γ(f, f)` with conservative `Γ`, and the
    /// positivity margin of `f`.
    pub fn full_rhs(&self, f: &SpectralField) -> (SpectralField, f64) {
        let c = self.columns(f);
        let mut gamma = self.gain(&c.f, &c.f);
        gamma.zip_mut_with(&(&c.af * &c.f), |g, l| *g -= l);
        self.remove_invariants(&mut gamma);
        gamma += &c.kf;
        (self.to_spectral(&gamma), self.positivity_margin(&c.f))
    }

    /// Resets the invariant coordinates of the `k = 0` mode to `target`.
    pub fn restore_mean_invariants(&self, f: &mut SpectralField, target: &[f64; 5]) {
        let basis = self.ops.basis();
        let col: Vec<f64> = f.values.column(0).iter().map(|c| c.re).collect();
        let now = basis.coefficients(&col);
        for (g, (t, n)) in basis.generators().iter().zip(target.iter().zip(now)) {
            let d = t - n;
            for (v, gr) in f.values.column_mut(0).iter_mut().zip(g) {
                v.re += d * gr;
            }
        }
    }

    pub fn mean_invariants(&self, f: &SpectralField) -> [f64; 5] {
        let col: Vec<f64> = f.values.column(0).iter().map(|c| c.re).collect();
        self.ops.basis().coefficients(&col)
    }
}

pub(crate) fn check_finite(f: &SpectralField, n: usize, t: f64) -> Result<()> {
    if f.values.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::Diverged { n, t })
    }
}
