//! The bilinear collision operator `Γ = Γ_gain - Γ_loss`.

use ndarray::{Array2, ArrayView1, ArrayView2};
use rayon::prelude::*;

use crate::collision::basis::PolynomialBasis;
use crate::collision::stencil::{gather, PaddedLattice};
use crate::collision::tables::CollisionTables;
use crate::error::Result;

/// `Γ_gain(f, g)(ξ) = ∫∫ |u|^γ B₀ μ^{1/2}(ξ_*) f(ξ'_*) g(ξ') dω dξ_*` by full
/// stencil quadrature.
pub fn gamma_gain(tables: &CollisionTables, f: &[f64], g: &[f64]) -> Result<Vec<f64>> {
    tables.check_len(f)?;
    tables.check_len(g)?;
    let vg = &tables.vgrid;
    let st = &tables.stencils;
    let n_v = vg.len();
    let sm = vg.sqrt_mu();
    let pl = PaddedLattice::new(vg.points_per_axis(), st.reach());
    let strides = pl.strides();
    let hf = pl.embed(&f.iter().zip(sm).map(|(a, s)| a / s).collect::<Vec<_>>());
    let hg = pl.embed(&g.iter().zip(sm).map(|(a, s)| a / s).collect::<Vec<_>>());
    Ok((0..n_v)
        .into_par_iter()
        .map(|i| {
            let ci = vg.coords(i);
            let mut acc = 0.0;
            for j in 0..n_v {
                let cj = vg.coords(j);
                let mut sj = 0.0;
                for s in st.for_offset(ci, cj) {
                    if s.weight == 0.0 {
                        continue;
                    }
                    let a = gather(&hf, pl.index(cj, s.star_base), strides, &s.star_w);
                    let b = gather(&hg, pl.index(ci, s.prime_base), strides, &s.prime_w);
                    sj += s.weight * a * b;
                }
                acc += sm[j] * sm[j] * sj;
            }
            sm[i] * acc
        })
        .collect())
}

/// `Γ_loss(f, g)(ξ) = g(ξ) ∫∫ |u|^γ B₀ μ^{1/2}(ξ_*) f(ξ_*) dω dξ_*`.
pub fn gamma_loss(tables: &CollisionTables, f: &[f64], g: &[f64]) -> Result<Vec<f64>> {
    tables.check_len(f)?;
    tables.check_len(g)?;
    let af = tables.loss.dot(&ArrayView1::from(f));
    Ok(g.iter().zip(af.iter()).map(|(a, b)| a * b).collect())
}

/// `Γ_gain - Γ_loss` straight from the quadrature.
pub fn gamma_raw(tables: &CollisionTables, f: &[f64], g: &[f64]) -> Result<Vec<f64>> {
    let gain = gamma_gain(tables, f, g)?;
    let loss = gamma_loss(tables, f, g)?;
    Ok(gain.iter().zip(loss).map(|(a, b)| a - b).collect())
}

/// `Γ(f, g)`. Only mass is conserved unless `f = g`, so no projection is
/// applied; see [`gamma_symmetric`] for the conservative form.
pub fn gamma_bilinear(tables: &CollisionTables, f: &[f64], g: &[f64]) -> Result<Vec<f64>> {
    gamma_raw(tables, f, g)
}

/// `½(Γ(f, g) + Γ(g, f))` with the invariant components left by the
/// quadrature removed. Equals the conservative `Γ(f, f)` when `f = g`.
pub fn gamma_symmetric(tables: &CollisionTables, f: &[f64], g: &[f64]) -> Result<Vec<f64>> {
    let mut out = gamma_raw(tables, f, g)?;
    if f != g {
        let swapped = gamma_raw(tables, g, f)?;
        out.iter_mut().zip(swapped).for_each(|(a, b)| *a = 0.5 * (*a + b));
    }
    tables.invariants.remove_invariants(&mut out);
    Ok(out)
}

/// `T[i][a·M + b] = Γ_gain(φ_a, φ_b)(ξ_i)` for the orthonormal basis
/// `φ_a = μ^{1/2} p_a`, so that `Γ_gain(f, g) ≈ Σ c_a d_b T[·][a, b]` with
/// `c = (φ, f)`, `d = (φ, g)`. Exact (up to rounding) when `f`, `g` lie in the
/// span.
#[derive(Debug, Clone)]
pub struct GalerkinTensor {
    basis: PolynomialBasis,
    tensor: Array2<f64>,
    /// Basis values laid out `(M, n_v)` and pre-multiplied by the cell weight.
    analysis: Array2<f64>,
}

impl GalerkinTensor {
    /// Panics if `degree > 3` (the monomial tables hold at most cubes).
    pub fn build(tables: &CollisionTables, degree: usize) -> Self {
        assert!(degree <= 3, "Galerkin degree {degree} exceeds 3");
        let vg = &tables.vgrid;
        let st = &tables.stencils;
        let basis = PolynomialBasis::new(vg, degree);
        let n = vg.points_per_axis();
        let n_v = vg.len();
        let sm = vg.sqrt_mu();
        let exps = basis.exponents().to_vec();
        let m = exps.len();
        let pl = PaddedLattice::new(n, st.reach());

        // powers x^k (k ≤ degree) per padded axis coordinate, zero outside the box
        let h = vg.spacing();
        let r = vg.half_width();
        let np = degree + 1;
        let powers: Vec<f64> = (0..pl.side)
            .flat_map(|p| {
                let c = p as i64 - pl.pad as i64;
                let inside = (0..n as i64).contains(&c);
                let x = -r + h * (c as f64 + 0.5);
                (0..np).map(move |k| if inside { x.powi(k as i32) } else { 0.0 })
            })
            .collect();
        let coef = Array2::from_shape_fn((m, m), |(a, b)| basis.coef()[a][b]);

        let mono = |c: [usize; 3], off: [i32; 3], w: &[[f64; 3]; 3], out: &mut [f64]| {
            let mut q = [[0.0f64; 4]; 3];
            for ax in 0..3 {
                let p0 = (c[ax] as i64 + pl.pad as i64 + off[ax] as i64) as usize;
                for e in 0..3 {
                    let we = w[ax][e];
                    if we == 0.0 {
                        continue;
                    }
                    let row = &powers[(p0 + e) * np..(p0 + e + 1) * np];
                    for k in 0..np {
                        q[ax][k] += we * row[k];
                    }
                }
            }
            for (o, al) in out.iter_mut().zip(&exps) {
                *o = q[0][al[0]] * q[1][al[1]] * q[2][al[2]];
            }
        };

        let rows: Vec<Vec<f64>> = (0..n_v)
            .into_par_iter()
            .map(|i| {
                let ci = vg.coords(i);
                let ntrip = n_v * st.per_offset();
                let mut xs = Array2::<f64>::zeros((ntrip, m));
                let mut ys = Array2::<f64>::zeros((ntrip, m));
                let mut t = 0;
                for j in 0..n_v {
                    let cj = vg.coords(j);
                    let mu_j = sm[j] * sm[j];
                    for s in st.for_offset(ci, cj) {
                        if s.weight == 0.0 {
                            continue;
                        }
                        let w = mu_j * s.weight;
                        let mut xr = xs.row_mut(t);
                        mono(cj, s.star_base, &s.star_w, xr.as_slice_mut().expect("contiguous"));
                        xr.mapv_inplace(|v| v * w);
                        let mut yr = ys.row_mut(t);
                        mono(ci, s.prime_base, &s.prime_w, yr.as_slice_mut().expect("contiguous"));
                        t += 1;
                    }
                }
                let xs = xs.slice(ndarray::s![..t, ..]);
                let ys = ys.slice(ndarray::s![..t, ..]);
                let tm = xs.t().dot(&ys);
                let tb = coef.dot(&tm).dot(&coef.t()) * sm[i];
                tb.into_raw_vec_and_offset().0
            })
            .collect();
        let mut tensor = Array2::zeros((n_v, m * m));
        for (i, row) in rows.into_iter().enumerate() {
            tensor.row_mut(i).assign(&ArrayView1::from(row.as_slice()));
        }
        let w = vg.weight();
        let analysis = Array2::from_shape_fn((m, n_v), |(a, i)| basis.vectors()[a][i] * w);
        Self { basis, tensor, analysis }
    }

    pub fn basis(&self) -> &PolynomialBasis {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// `(n_v, M²)` table.
    pub fn tensor(&self) -> &Array2<f64> {
        &self.tensor
    }

    /// Basis coefficients `(φ_a, f)` of every column of `f` (`n_v × cols`).
    pub fn coefficients(&self, f: ArrayView2<f64>) -> Array2<f64> {
        self.analysis.dot(&f)
    }

    /// `Γ_gain` column by column for `f`, `g` of shape `(n_v, cols)`.
    pub fn gain_columns(&self, f: ArrayView2<f64>, g: ArrayView2<f64>) -> Array2<f64> {
        self.gain_from_coefficients(self.coefficients(f).view(), self.coefficients(g).view())
    }

    /// `Γ_gain` for columns given by their basis coefficients `(M, cols)`.
    pub fn gain_from_coefficients(&self, cf: ArrayView2<f64>, cg: ArrayView2<f64>) -> Array2<f64> {
        let m = self.dim();
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
        self.tensor.dot(&outer)
    }

    /// `Γ_gain(f, g)` for single velocity vectors.
    pub fn gain(&self, f: &[f64], g: &[f64]) -> Vec<f64> {
        let fv = ArrayView2::from_shape((f.len(), 1), f).expect("column");
        let gv = ArrayView2::from_shape((g.len(), 1), g).expect("column");
        self.gain_columns(fv, gv).into_raw_vec_and_offset().0
    }
}
