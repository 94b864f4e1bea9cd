//! Lifting of the velocity operators to fields over `(x, ξ)`.

use ndarray::{Array2, Axis};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::collision::tables::CollisionTables;
use crate::error::{Error, Result};
use crate::lp::{Dealiaser, SpectralField};

/// Velocity operator applied pointwise in `x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldOp {
    L,
    K,
    NuMult,
    Gamma,
}

impl std::str::FromStr for FieldOp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "L" | "l" => Ok(FieldOp::L),
            "K" | "k" => Ok(FieldOp::K),
            "nu" | "nu_mult" => Ok(FieldOp::NuMult),
            "gamma" | "Gamma" => Ok(FieldOp::Gamma),
            other => Err(Error::InvalidParameter(format!("unknown field operator {other}"))),
        }
    }
}

fn check(tables: &CollisionTables, f: &SpectralField) -> Result<()> {
    if f.n_vel() != tables.len() {
        return Err(Error::GridMismatch(format!(
            "field has {} velocity rows, tables have {}",
            f.n_vel(),
            tables.len()
        )));
    }
    Ok(())
}

/// `M f̂(k, ·)` for every mode, with a real matrix `M` of shape
/// `(rows_out, n_vel)`.
pub fn apply_matrix(m: &Array2<f64>, f: &SpectralField) -> SpectralField {
    let modes = f.values.ncols();
    let mut split = Array2::<f64>::zeros((f.n_vel(), 2 * modes));
    for ((r, c), v) in f.values.indexed_iter() {
        split[[r, c]] = v.re;
        split[[r, modes + c]] = v.im;
    }
    let out = m.dot(&split);
    let mut res = SpectralField::zeros(&f.grid, m.nrows());
    res.real = f.real;
    for ((r, c), v) in res.values.indexed_iter_mut() {
        *v = Complex64::new(out[[r, c]], out[[r, modes + c]]);
    }
    res
}

/// Scales row `r` by `d[r]`.
pub fn apply_diagonal(d: &[f64], f: &SpectralField) -> SpectralField {
    let mut res = f.clone();
    for (mut row, &s) in res.values.axis_iter_mut(Axis(0)).zip(d) {
        row.mapv_inplace(|v| v * s);
    }
    res
}

/// Conservative symmetrised `Γ(F, G)` on physical columns `(n_v, points)`:
/// Galerkin gain, exact loss, invariant components removed.
pub fn gamma_columns(tables: &CollisionTables, f: &Array2<f64>, g: &Array2<f64>) -> Array2<f64> {
    let gal = tables.galerkin();
    let mut out = gal.gain_columns(f.view(), g.view());
    let af = tables.loss.dot(f);
    out.zip_mut_with(&(&af * g), |o, l| *o -= l);
    if f != g {
        let mut swapped = gal.gain_columns(g.view(), f.view());
        let ag = tables.loss.dot(g);
        swapped.zip_mut_with(&(&ag * f), |o, l| *o -= l);
        out.zip_mut_with(&swapped, |a, b| *a = 0.5 * (*a + b));
    }
    remove_invariant_columns(tables, &mut out);
    out
}

/// Applies `{I - P}` to every column.
pub fn remove_invariant_columns(tables: &CollisionTables, x: &mut Array2<f64>) {
    let w = tables.vgrid.weight();
    let e = tables.invariants.vectors();
    for ek in e {
        let ev = ndarray::ArrayView1::from(ek.as_slice());
        let proj = ev.dot(x) * w;
        for (r, &er) in ek.iter().enumerate() {
            let mut row = x.row_mut(r);
            row.zip_mut_with(&proj, |v, p| *v -= er * p);
        }
    }
}

/// Symmetrised conservative `Γ(F, G)` for spectral fields: transform to the padded physical grid,
/// apply pointwise, transform back.
pub fn gamma_field(tables: &CollisionTables, f: &SpectralField, g: &SpectralField) -> Result<SpectralField> {
    check(tables, f)?;
    check(tables, g)?;
    f.grid.ensure_same(&g.grid)?;
    if !(f.real && g.real) {
        return Err(Error::InvalidParameter("Γ on fields requires real-valued inputs".into()));
    }
    let de = Dealiaser::new(&f.grid);
    let fp = de.rows_to_padded(f);
    let gp = de.rows_to_padded(g);
    let out = gamma_columns(tables, &fp, &gp);
    let mut res = de.rows_from_padded(&out);
    res.real = true;
    Ok(res)
}

/// Pointwise-in-`x` application of a velocity operator.
pub fn apply_field(
    tables: &CollisionTables,
    op: FieldOp,
    f: &SpectralField,
    g: Option<&SpectralField>,
) -> Result<SpectralField> {
    check(tables, f)?;
    match op {
        FieldOp::K => Ok(apply_matrix(&tables.k_matrix, f)),
        FieldOp::NuMult => Ok(apply_diagonal(&tables.nu, f)),
        FieldOp::L => {
            let kf = apply_matrix(&tables.k_matrix, f);
            apply_diagonal(&tables.nu, f).sub(&kf)
        }
        FieldOp::Gamma => gamma_field(tables, f, g.unwrap_or(f)),
    }
}
