//! Dealiased products and the Bony paraproduct decomposition.

use ndarray::{Array2, Axis};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lp::dyadic::DyadicSystem;
use crate::lp::grid::{padding_map, FourierGrid, SpectralField, Transform};

/// Pointwise products of spectral fields evaluated on the 3/2-padded grid.
#[derive(Debug, Clone)]
pub struct Dealiaser {
    grid: FourierGrid,
    map: Vec<usize>,
    padded: Transform,
}

impl Dealiaser {
    pub fn new(grid: &FourierGrid) -> Self {
        let (m, map) = padding_map(grid);
        Self { grid: grid.clone(), map, padded: Transform::new(grid.dim(), m) }
    }

    pub fn padded_len(&self) -> usize {
        self.padded.len()
    }

    /// Physical samples of one coefficient row on the padded grid.
    pub fn to_padded(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let mut buf = vec![Complex64::default(); self.padded.len()];
        for (c, &slot) in coeffs.iter().zip(&self.map) {
            buf[slot] = *c;
        }
        self.padded.inverse(&mut buf);
        buf
    }

    /// Truncates padded physical samples back to the coefficients of the base grid.
    pub fn from_padded(&self, mut phys: Vec<Complex64>) -> Vec<Complex64> {
        self.padded.forward(&mut phys);
        let mut out: Vec<Complex64> = self.map.iter().map(|&slot| phys[slot]).collect();
        for (i, c) in out.iter_mut().enumerate() {
            if self.grid.is_nyquist(i) {
                *c = Complex64::default();
            }
        }
        out
    }

    /// Padded physical samples of every row, shape `(rows, padded_len)`.
    pub fn rows_to_padded(&self, f: &SpectralField) -> Array2<f64> {
        let mut out = Array2::zeros((f.n_vel(), self.padded.len()));
        for (row, mut orow) in f.values.axis_iter(Axis(0)).zip(out.axis_iter_mut(Axis(0))) {
            let p = self.to_padded(row.as_slice().expect("row-major"));
            orow.iter_mut().zip(p).for_each(|(o, v)| *o = v.re);
        }
        out
    }

    /// Inverse of [`Self::rows_to_padded`] followed by truncation.
    pub fn rows_from_padded(&self, phys: &Array2<f64>) -> SpectralField {
        let mut out = SpectralField::zeros(&self.grid, phys.nrows());
        for (prow, mut orow) in phys.axis_iter(Axis(0)).zip(out.values.axis_iter_mut(Axis(0))) {
            let buf: Vec<Complex64> = prow.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            let c = self.from_padded(buf);
            orow.iter_mut().zip(c).for_each(|(o, v)| *o = v);
        }
        out
    }

    /// Dealiased row-wise product `u·v`.
    pub fn product(&self, u: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
        check_pair(&self.grid, u, v)?;
        let mut out = SpectralField::zeros(&self.grid, u.n_vel());
        out.real = u.real && v.real;
        for r in 0..u.n_vel() {
            let a = self.to_padded(u.values.row(r).as_slice().expect("row-major"));
            let b = self.to_padded(v.values.row(r).as_slice().expect("row-major"));
            let prod: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
            let c = self.from_padded(prod);
            out.values.row_mut(r).iter_mut().zip(c).for_each(|(o, v)| *o = v);
        }
        Ok(out)
    }
}

fn check_pair(grid: &FourierGrid, u: &SpectralField, v: &SpectralField) -> Result<()> {
    grid.ensure_same(&u.grid)?;
    grid.ensure_same(&v.grid)?;
    if u.n_vel() != v.n_vel() {
        return Err(Error::GridMismatch(format!("{} vs {} velocity rows", u.n_vel(), v.n_vel())));
    }
    Ok(())
}

/// Sum of dealiased products `Σ a_j · b_j`, accumulated in padded physical
/// space in the order given.
fn sum_of_products(de: &Dealiaser, pairs: &[(SpectralField, SpectralField)], rows: usize) -> SpectralField {
    let mut out = SpectralField::zeros(&de.grid, rows);
    for r in 0..rows {
        let mut acc = vec![Complex64::default(); de.padded_len()];
        for (a, b) in pairs {
            let pa = de.to_padded(a.values.row(r).as_slice().expect("row-major"));
            let pb = de.to_padded(b.values.row(r).as_slice().expect("row-major"));
            acc.iter_mut().zip(pa.iter().zip(&pb)).for_each(|(s, (x, y))| *s += x * y);
        }
        let c = de.from_padded(acc);
        out.values.row_mut(r).iter_mut().zip(c).for_each(|(o, v)| *o = v);
    }
    out
}

/// Paraproduct `T_u v = Σ_j S_{j-1}u · Δ_j v`.
pub fn paraproduct(sys: &DyadicSystem, u: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
    check_pair(sys.grid(), u, v)?;
    let de = Dealiaser::new(sys.grid());
    let mut pairs = Vec::new();
    for j in sys.blocks() {
        // S_{j-1} with the convention S_{-2} = S_{-1} = 0
        if j - 1 < 0 {
            continue;
        }
        pairs.push((sys.low_pass(j - 1, u)?, sys.dyadic_block(j, v)?));
    }
    let mut out = sum_of_products(&de, &pairs, u.n_vel());
    out.real = u.real && v.real;
    Ok(out)
}

/// Bony remainder `R(u, v) = Σ_{|j'-j| ≤ 1} Δ_{j'}u · Δ_j v`.
pub fn remainder(sys: &DyadicSystem, u: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
    check_pair(sys.grid(), u, v)?;
    let de = Dealiaser::new(sys.grid());
    let ub: Vec<SpectralField> = sys.blocks().map(|j| sys.dyadic_block(j, u)).collect::<Result<_>>()?;
    let vb: Vec<SpectralField> = sys.blocks().map(|j| sys.dyadic_block(j, v)).collect::<Result<_>>()?;
    let nb = ub.len();
    let mut pairs = Vec::new();
    for j in 0..nb {
        for jp in j.saturating_sub(1)..(j + 2).min(nb) {
            pairs.push((ub[jp].clone(), vb[j].clone()));
        }
    }
    let mut out = sum_of_products(&de, &pairs, u.n_vel());
    out.real = u.real && v.real;
    Ok(out)
}
