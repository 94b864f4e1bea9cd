use ndarray::{Array2, Zip};
use num_complex::Complex64;

use crate::collision::CollisionTables;
use crate::error::{Error, Result};
use crate::lp::{FourierGrid, SpectralField};

/// Exact propagator of `∂_t f + (i k·ξ + ν) f = r` over one step with frozen
/// `r`: `f ← e^{-z dt} f + (1 - e^{-z dt})/z · r`.
#[derive(Debug, Clone)]
pub struct Propagator {
    dt: f64,
    decay: Array2<Complex64>,
    phi: Array2<Complex64>,
}

impl Propagator {
    pub fn new(grid: &FourierGrid, tables: &CollisionTables, dt: f64) -> Self {
        let nodes = tables.velocity_grid().nodes();
        let nu = tables.nu();
        let dim = grid.dim();
        let kv: Vec<[f64; 3]> = (0..grid.len()).map(|k| grid.k_vec(k)).collect();
        let ny: Vec<bool> = (0..grid.len()).map(|k| grid.is_nyquist(k)).collect();
        let shape = (nu.len(), grid.len());
        let mut decay = Array2::zeros(shape);
        let mut phi = Array2::zeros(shape);
        for r in 0..shape.0 {
            for k in 0..shape.1 {
                if ny[k] {
                    continue;
                }
                let s: f64 = (0..dim).map(|a| kv[k][a] * nodes[r][a]).sum();
                let z = Complex64::new(nu[r], s);
                let e = (-z * dt).exp();
                decay[[r, k]] = e;
                // ν > 0 keeps z away from 0
                phi[[r, k]] = (1.0 - e) / z;
            }
        }
        Self { dt, decay, phi }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// One exponential-Euler step.
    pub fn step(&self, f: &SpectralField, rhs: &SpectralField) -> Result<SpectralField> {
        if f.values.dim() != self.decay.dim() || rhs.values.dim() != self.decay.dim() {
            return Err(Error::GridMismatch(format!(
                "propagator shape {:?}, field {:?}, rhs {:?}",
                self.decay.dim(),
                f.values.dim(),
                rhs.values.dim()
            )));
        }
        let mut out = f.clone();
        Zip::from(&mut out.values).and(&self.decay).and(&self.phi).and(&rhs.values).for_each(|o, &e, &p, &r| {
            *o = e * *o + p * r;
        });
        out.real = f.real && rhs.real;
        Ok(out)
    }
}

/// One exponential-Euler step of `f` with frozen right-hand side `rhs`.
pub fn linear_step(f: &SpectralField, dt: f64, tables: &CollisionTables, rhs: &SpectralField) -> Result<SpectralField> {
    f.grid.ensure_same(&rhs.grid)?;
    Propagator::new(&f.grid, tables, dt).step(f, rhs)
}
