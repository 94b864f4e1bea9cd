//! Grid-orthonormal velocity bases: the five collision invariants and the
//! low-degree Hermite-type space used for Galerkin evaluation of `Γ_gain`.

use crate::collision::quadrature::{norm_sq, VelocityGrid};

/// Exponents `(α₁, α₂, α₃)` of all monomials up to `degree`, graded.
pub fn monomial_exponents(degree: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for d in 0..=degree {
        for a in (0..=d).rev() {
            for b in (0..=d - a).rev() {
                out.push([a, b, d - a - b]);
            }
        }
    }
    out
}

/// Modified Gram-Schmidt (two passes) under the grid inner product.
/// Returns the orthonormal vectors and the triangular change of basis
/// `e_a = Σ_m coef[a][m] v_m`.
fn orthonormalise(vg: &VelocityGrid, vs: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let m = vs.len();
    let mut es: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut coef: Vec<Vec<f64>> = Vec::with_capacity(m);
    for (k, v) in vs.iter().enumerate() {
        let mut e = v.clone();
        let mut c = vec![0.0; m];
        c[k] = 1.0;
        for _ in 0..2 {
            for (ej, cj) in es.iter().zip(&coef) {
                let p = vg.inner(ej, &e);
                e.iter_mut().zip(ej).for_each(|(x, y)| *x -= p * y);
                c.iter_mut().zip(cj).for_each(|(x, y)| *x -= p * y);
            }
        }
        let nrm = vg.inner(&e, &e).sqrt();
        e.iter_mut().for_each(|x| *x /= nrm);
        c.iter_mut().for_each(|x| *x /= nrm);
        es.push(e);
        coef.push(c);
    }
    (es, coef)
}

/// Orthonormal basis of `span{√μ, ξ_i√μ, |ξ|²√μ}` under the grid quadrature,
/// i.e. the exact discrete counterpart of the macroscopic projection.
#[derive(Debug, Clone)]
pub struct InvariantBasis {
    vectors: Vec<Vec<f64>>,
    /// Raw generators `√μ, ξ_i√μ, (|ξ|²-3)√μ`.
    generators: Vec<Vec<f64>>,
    /// Inverse Gram matrix of the generators.
    gram_inv: [[f64; 5]; 5],
    weight: f64,
}

impl InvariantBasis {
    pub fn new(vg: &VelocityGrid) -> Self {
        let sm = vg.sqrt_mu();
        let nodes = vg.nodes();
        let mut generators = vec![sm.to_vec()];
        for a in 0..3 {
            generators.push(nodes.iter().zip(sm).map(|(v, s)| v[a] * s).collect());
        }
        generators.push(nodes.iter().zip(sm).map(|(v, s)| (norm_sq(*v) - 3.0) * s).collect());
        let (vectors, _) = orthonormalise(vg, &generators);
        let mut gram = [[0.0; 5]; 5];
        for i in 0..5 {
            for j in 0..5 {
                gram[i][j] = vg.inner(&generators[i], &generators[j]);
            }
        }
        Self { vectors, generators, gram_inv: invert5(gram), weight: vg.weight() }
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    /// Generators `√μ, ξ_i√μ, (|ξ|²-3)√μ`.
    pub fn generators(&self) -> &[Vec<f64>] {
        &self.generators
    }

    /// Coordinates `(a, b₁, b₂, b₃, c)` of the projection of `f` onto the
    /// invariant span, with respect to the generators.
    pub fn coefficients(&self, f: &[f64]) -> [f64; 5] {
        let mut rhs = [0.0; 5];
        for (r, g) in rhs.iter_mut().zip(&self.generators) {
            *r = g.iter().zip(f).map(|(x, y)| x * y).sum::<f64>() * self.weight;
        }
        let mut out = [0.0; 5];
        for i in 0..5 {
            out[i] = (0..5).map(|j| self.gram_inv[i][j] * rhs[j]).sum();
        }
        out
    }

    /// Maps generator inner products `(g_k, f)` to coordinates.
    pub fn solve(&self, rhs: [f64; 5]) -> [f64; 5] {
        let mut out = [0.0; 5];
        for i in 0..5 {
            out[i] = (0..5).map(|j| self.gram_inv[i][j] * rhs[j]).sum();
        }
        out
    }

    /// `P f` on the grid.
    pub fn project(&self, f: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; f.len()];
        for e in &self.vectors {
            let p = e.iter().zip(f).map(|(x, y)| x * y).sum::<f64>() * self.weight;
            out.iter_mut().zip(e).for_each(|(o, x)| *o += p * x);
        }
        out
    }

    /// `{I - P} f` on the grid.
    pub fn microscopic(&self, f: &[f64]) -> Vec<f64> {
        let p = self.project(f);
        f.iter().zip(p).map(|(a, b)| a - b).collect()
    }

    /// In-place `{I - P}` applied to a contiguous slice.
    pub fn remove_invariants(&self, f: &mut [f64]) {
        for e in &self.vectors {
            let p = e.iter().zip(f.iter()).map(|(x, y)| x * y).sum::<f64>() * self.weight;
            f.iter_mut().zip(e).for_each(|(o, x)| *o -= p * x);
        }
    }
}

fn invert5(mut a: [[f64; 5]; 5]) -> [[f64; 5]; 5] {
    let mut inv = [[0.0; 5]; 5];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for col in 0..5 {
        let piv = (col..5).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs())).unwrap_or(col);
        a.swap(col, piv);
        inv.swap(col, piv);
        let d = a[col][col];
        for k in 0..5 {
            a[col][k] /= d;
            inv[col][k] /= d;
        }
        for r in 0..5 {
            if r != col {
                let f = a[r][col];
                for k in 0..5 {
                    a[r][k] -= f * a[col][k];
                    inv[r][k] -= f * inv[col][k];
                }
            }
        }
    }
    inv
}

/// Orthonormal basis `φ_a = μ^{1/2} p_a` with `p_a` polynomials of degree at
/// most `degree`, orthonormal under the grid quadrature.
#[derive(Debug, Clone)]
pub struct PolynomialBasis {
    degree: usize,
    exponents: Vec<[usize; 3]>,
    /// `p_a = Σ_m coef[a][m] ξ^{α_m}`.
    coef: Vec<Vec<f64>>,
    vectors: Vec<Vec<f64>>,
}

impl PolynomialBasis {
    pub const DEFAULT_DEGREE: usize = 3;

    pub fn new(vg: &VelocityGrid, degree: usize) -> Self {
        let exponents = monomial_exponents(degree);
        let sm = vg.sqrt_mu();
        let raw: Vec<Vec<f64>> = exponents
            .iter()
            .map(|al| {
                vg.nodes()
                    .iter()
                    .zip(sm)
                    .map(|(v, s)| s * v[0].powi(al[0] as i32) * v[1].powi(al[1] as i32) * v[2].powi(al[2] as i32))
                    .collect()
            })
            .collect();
        let (vectors, coef) = orthonormalise(vg, &raw);
        Self { degree, exponents, coef, vectors }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn exponents(&self) -> &[[usize; 3]] {
        &self.exponents
    }

    pub fn coef(&self) -> &[Vec<f64>] {
        &self.coef
    }

    /// Grid values of `φ_a`.
    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }
}
