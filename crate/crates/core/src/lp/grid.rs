//! Periodic spatial grids, their FFTs, and spectral fields over `(k, ξ)`.

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::{Array2, Axis};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Periodic torus `[0, L)^d` sampled with `n` points per axis.
///
/// Mode indices are flattened row-major with axis 0 slowest; along each axis
/// they follow FFT order (`0, 1, .., n/2 - 1, -n/2, .., -1`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierGrid {
    dim: usize,
    n: usize,
    length: f64,
}

impl FourierGrid {
    pub fn new(dim: usize, n: usize) -> Result<Self> {
        Self::with_length(dim, n, 2.0 * PI)
    }

    pub fn with_length(dim: usize, n: usize, length: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidGrid(format!("spatial dimension {dim} not in 1..=3")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points per axis must be a power of two >= 8, got {n}"
            )));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidGrid(format!("domain length {length}")));
        }
        Ok(Self { dim, n, length })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points_per_axis(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Number of modes (equivalently, of physical points).
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Volume of one physical cell, `(L/n)^d`.
    pub fn cell_volume(&self) -> f64 {
        (self.length / self.n as f64).powi(self.dim as i32)
    }

    /// Volume of the torus, `L^d`.
    pub fn volume(&self) -> f64 {
        self.length.powi(self.dim as i32)
    }

    /// `2π/L`: the physical size of one lattice step in frequency.
    pub fn k_unit(&self) -> f64 {
        2.0 * PI / self.length
    }

    /// Integer lattice coordinates of a flattened mode index (unused axes are 0).
    pub fn lattice(&self, idx: usize) -> [i64; 3] {
        let mut out = [0i64; 3];
        let mut rem = idx;
        for ax in (0..self.dim).rev() {
            let j = rem % self.n;
            rem /= self.n;
            out[ax] = signed_index(j, self.n);
        }
        out
    }

    /// Physical wavevector of a mode.
    pub fn k_vec(&self, idx: usize) -> [f64; 3] {
        let l = self.lattice(idx);
        let s = self.k_unit();
        [l[0] as f64 * s, l[1] as f64 * s, l[2] as f64 * s]
    }

    pub fn k_norm(&self, idx: usize) -> f64 {
        let k = self.k_vec(idx);
        (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt()
    }

    /// True for modes sitting on the Nyquist row of any axis.
    pub fn is_nyquist(&self, idx: usize) -> bool {
        let l = self.lattice(idx);
        let half = (self.n / 2) as i64;
        l[..self.dim].iter().any(|&c| c == -half)
    }

    /// Largest `|k|` among non-Nyquist modes.
    pub fn k_max(&self) -> f64 {
        let m = (self.n / 2 - 1) as f64 * self.k_unit();
        m * (self.dim as f64).sqrt()
    }

    /// Index of the mode with lattice coordinates `-l`.
    pub fn negated(&self, idx: usize) -> usize {
        let l = self.lattice(idx);
        let mut out = 0usize;
        for &c in l.iter().take(self.dim) {
            out = out * self.n + ((-c).rem_euclid(self.n as i64)) as usize;
        }
        out
    }

    /// Physical coordinates of a grid point.
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let mut out = [0.0; 3];
        let mut rem = idx;
        let h = self.length / self.n as f64;
        for ax in (0..self.dim).rev() {
            out[ax] = (rem % self.n) as f64 * h;
            rem /= self.n;
        }
        out
    }

    pub(crate) fn ensure_same(&self, other: &FourierGrid) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch(format!("{self:?} vs {other:?}")));
        }
        Ok(())
    }
}

fn signed_index(j: usize, n: usize) -> i64 {
    if j < n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// Cached n-dimensional complex FFT on an `m^d` box.
///
/// `forward` returns Fourier-series coefficients (scaled by `1/m^d`);
/// `inverse` sums the series without scaling.
#[derive(Clone)]
pub struct Transform {
    dim: usize,
    m: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Transform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Transform").field("dim", &self.dim).field("m", &self.m).finish()
    }
}

impl Transform {
    pub fn new(dim: usize, m: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self { dim, m, fwd: planner.plan_fft_forward(m), inv: planner.plan_fft_inverse(m) }
    }

    pub fn len(&self) -> usize {
        self.m.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(data, &self.fwd);
        let s = 1.0 / self.len() as f64;
        data.iter_mut().for_each(|c| *c *= s);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, &self.inv);
    }

    fn run(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let m = self.m;
        debug_assert_eq!(data.len(), self.len());
        let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
        let mut line = vec![Complex64::default(); m];
        for ax in 0..self.dim {
            // stride of axis `ax` in row-major layout
            let stride = m.pow((self.dim - 1 - ax) as u32);
            if stride == 1 {
                for chunk in data.chunks_exact_mut(m) {
                    plan.process_with_scratch(chunk, &mut scratch);
                }
                continue;
            }
            let block = stride * m;
            for base in (0..data.len()).step_by(block) {
                for off in 0..stride {
                    for (j, l) in line.iter_mut().enumerate() {
                        *l = data[base + off + j * stride];
                    }
                    plan.process_with_scratch(&mut line, &mut scratch);
                    for (j, l) in line.iter().enumerate() {
                        data[base + off + j * stride] = *l;
                    }
                }
            }
        }
    }
}

/// Maps each mode of an `n`-grid to its slot on the 3/2-padded `m`-grid.
pub(crate) fn padding_map(grid: &FourierGrid) -> (usize, Vec<usize>) {
    let n = grid.points_per_axis();
    let m = 3 * n / 2;
    let map = (0..grid.len())
        .map(|idx| {
            let l = grid.lattice(idx);
            l[..grid.dim()]
                .iter()
                .fold(0usize, |acc, &c| acc * m + c.rem_euclid(m as i64) as usize)
        })
        .collect();
    (m, map)
}

/// Complex spectral samples of a field over `(k, ξ)`.
///
/// `values` has shape `(n_vel, n_modes)`: one row of Fourier coefficients per
/// velocity node (a single row for purely spatial fields).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    pub grid: FourierGrid,
    pub values: Array2<Complex64>,
    /// The physical-space field is real (Hermitian spectrum).
    pub real: bool,
}

impl SpectralField {
    pub fn zeros(grid: &FourierGrid, n_vel: usize) -> Self {
        Self { grid: grid.clone(), values: Array2::zeros((n_vel, grid.len())), real: true }
    }

    pub fn n_vel(&self) -> usize {
        self.values.nrows()
    }

    /// Builds a field from real physical samples, shape `(n_vel, n_points)`.
    pub fn from_physical(grid: &FourierGrid, physical: &Array2<f64>) -> Result<Self> {
        if physical.ncols() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} physical points for a grid of {}",
                physical.ncols(),
                grid.len()
            )));
        }
        let tr = Transform::new(grid.dim(), grid.points_per_axis());
        let mut values = physical.mapv(|v| Complex64::new(v, 0.0));
        for mut row in values.axis_iter_mut(Axis(0)) {
            let s = row.as_slice_mut().expect("row-major");
            tr.forward(s);
        }
        let mut f = Self { grid: grid.clone(), values, real: true };
        f.zero_nyquist();
        Ok(f)
    }

    /// Real physical samples, shape `(n_vel, n_points)`.
    pub fn to_physical(&self) -> Array2<f64> {
        let tr = Transform::new(self.grid.dim(), self.grid.points_per_axis());
        let mut out = Array2::zeros(self.values.raw_dim());
        let mut buf = vec![Complex64::default(); self.grid.len()];
        for (row, mut orow) in self.values.axis_iter(Axis(0)).zip(out.axis_iter_mut(Axis(0))) {
            buf.iter_mut().zip(row.iter()).for_each(|(b, v)| *b = *v);
            tr.inverse(&mut buf);
            orow.iter_mut().zip(buf.iter()).for_each(|(o, b)| *o = b.re);
        }
        out
    }

    pub fn zero_nyquist(&mut self) {
        let ny: Vec<usize> = (0..self.grid.len()).filter(|&i| self.grid.is_nyquist(i)).collect();
        for mut row in self.values.axis_iter_mut(Axis(0)) {
            for &i in &ny {
                row[i] = Complex64::default();
            }
        }
    }

    /// Largest violation of `f̂(-k) = conj f̂(k)`.
    pub fn hermitian_defect(&self) -> f64 {
        let neg: Vec<usize> = (0..self.grid.len()).map(|i| self.grid.negated(i)).collect();
        let mut worst = 0.0f64;
        for row in self.values.axis_iter(Axis(0)) {
            for (i, &j) in neg.iter().enumerate() {
                worst = worst.max((row[j] - row[i].conj()).norm());
            }
        }
        worst
    }

    /// `L²_x` norm of each velocity row (Parseval on the torus).
    pub fn row_l2_norms(&self) -> Vec<f64> {
        let vol = self.grid.volume();
        self.values
            .axis_iter(Axis(0))
            .map(|row| (vol * row.iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt())
            .collect()
    }

    /// Plain (unweighted) Euclidean size of the coefficient array.
    pub fn coeff_norm(&self) -> f64 {
        self.values.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { grid: self.grid.clone(), values: &self.values * Complex64::new(s, 0.0), real: self.real }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        if self.n_vel() != other.n_vel() {
            return Err(Error::GridMismatch("velocity rows differ".into()));
        }
        Ok(Self {
            grid: self.grid.clone(),
            values: &self.values + &other.values,
            real: self.real && other.real,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scaled(-1.0))
    }

    /// Multiplies every row by a real Fourier multiplier.
    pub fn apply_multiplier(&self, mult: &[f64]) -> Self {
        let mut out = self.clone();
        for mut row in out.values.axis_iter_mut(Axis(0)) {
            row.iter_mut().zip(mult).for_each(|(v, &m)| *v *= m);
        }
        out
    }

    /// Spatial partial derivative `∂_axis`.
    pub fn derivative(&self, axis: usize) -> Self {
        let mut out = self.clone();
        if axis >= self.grid.dim() {
            out.values.fill(Complex64::default());
            return out;
        }
        let ks: Vec<f64> = (0..self.grid.len()).map(|i| self.grid.k_vec(i)[axis]).collect();
        for mut row in out.values.axis_iter_mut(Axis(0)) {
            row.iter_mut().zip(&ks).for_each(|(v, &k)| *v *= Complex64::new(0.0, k));
        }
        out.zero_nyquist();
        out
    }

    /// Row `r` as a single-row spatial field.
    pub fn row(&self, r: usize) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.slice(ndarray::s![r..r + 1, ..]).to_owned(),
            real: self.real,
        }
    }
}
