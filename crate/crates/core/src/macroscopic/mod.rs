//! Macroscopic projection `P`, the moment functionals `Θ`, `Λ`, the
//! fluid-type moment system and the interactive functional.

use ndarray::{Array2, Axis};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::collision::{apply_field, apply_matrix, CollisionTables, FieldOp, InvariantBasis, VelocityGrid};
use crate::error::{Error, Result};
use crate::lp::{DyadicSystem, SpectralField};
use crate::norms::DistributionTrajectory;

/// Coefficient fields of `P f = (a + ξ·b + (|ξ|²-3)c)√μ`, stored as five rows
/// `(a, b₁, b₂, b₃, c)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MacroCoeffs {
    pub fields: SpectralField,
}

impl MacroCoeffs {
    pub fn a(&self) -> SpectralField {
        self.fields.row(0)
    }

    pub fn b(&self, i: usize) -> SpectralField {
        self.fields.row(1 + i)
    }

    pub fn c(&self) -> SpectralField {
        self.fields.row(4)
    }
}

/// `Θ_{im}` (nine rows, row-major in `(i, m)`) and `Λ_i` (three rows).
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSet {
    pub theta: SpectralField,
    pub lambda: SpectralField,
}

impl MomentSet {
    pub fn theta(&self, i: usize, m: usize) -> SpectralField {
        self.theta.row(3 * i + m)
    }

    pub fn lambda(&self, i: usize) -> SpectralField {
        self.lambda.row(i)
    }
}

/// Weights of the interactive functional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InteractiveParams {
    pub kappa1: f64,
    pub kappa2: f64,
    pub kappa3: f64,
}

impl Default for InteractiveParams {
    fn default() -> Self {
        Self { kappa1: 0.1, kappa2: 0.01, kappa3: 0.05 }
    }
}

impl InteractiveParams {
    pub fn validate(&self) -> Result<()> {
        let ok = 0.0 < self.kappa2 && self.kappa2 < self.kappa1 && self.kappa1 < 1.0 && 0.0 < self.kappa3 && self.kappa3 < 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "need 0 < kappa2 < kappa1 < 1 and 0 < kappa3 < 1, got {self:?}"
            )))
        }
    }
}

/// Velocity-moment matrices for one grid, pre-multiplied by the quadrature
/// weight.
#[derive(Debug, Clone)]
pub struct MomentOperators {
    basis: InvariantBasis,
    /// `(5, n_v)`: `w·(√μ, ξ_i√μ, (|ξ|²-3)√μ)`.
    generators_w: Array2<f64>,
    /// `(n_v, 5)` generators for reconstruction.
    generators: Array2<f64>,
    /// `(5, 5)` inverse Gram matrix.
    gram_inv: Array2<f64>,
    theta_w: Array2<f64>,
    lambda_w: Array2<f64>,
    /// `ξ_j` per node.
    xi: Array2<f64>,
    weight: f64,
}

impl MomentOperators {
    pub fn new(vg: &VelocityGrid) -> Self {
        let basis = InvariantBasis::new(vg);
        let n_v = vg.len();
        let w = vg.weight();
        let gens = basis.generators();
        let generators = Array2::from_shape_fn((n_v, 5), |(i, k)| gens[k][i]);
        let generators_w = generators.t().mapv(|v| v * w);
        let mut gram_inv = Array2::zeros((5, 5));
        for k in 0..5 {
            let mut e = [0.0; 5];
            e[k] = 1.0;
            let col = basis.solve(e);
            for r in 0..5 {
                gram_inv[[r, k]] = col[r];
            }
        }
        let sm = vg.sqrt_mu();
        let nodes = vg.nodes();
        let theta_w = Array2::from_shape_fn((9, n_v), |(r, j)| {
            let (i, m) = (r / 3, r % 3);
            let d = if i == m { 1.0 } else { 0.0 };
            w * (nodes[j][i] * nodes[j][m] - d) * sm[j]
        });
        let lambda_w = Array2::from_shape_fn((3, n_v), |(i, j)| {
            let s: f64 = nodes[j].iter().map(|x| x * x).sum();
            w * 0.1 * (s - 5.0) * nodes[j][i] * sm[j]
        });
        let xi = Array2::from_shape_fn((n_v, 3), |(j, a)| nodes[j][a]);
        Self { basis, generators_w, generators, gram_inv, theta_w, lambda_w, xi, weight: w }
    }

    pub fn basis(&self) -> &InvariantBasis {
        &self.basis
    }

    /// Velocity cell weight.
    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// `(a, b, c)` of `f`.
    pub fn coefficients(&self, f: &SpectralField) -> Result<MacroCoeffs> {
        self.check(f)?;
        let rhs = apply_matrix(&self.generators_w, f);
        Ok(MacroCoeffs { fields: apply_matrix(&self.gram_inv, &rhs) })
    }

    /// `(MacroCoeffs, P f, {I-P} f)`.
    pub fn project(&self, f: &SpectralField) -> Result<(MacroCoeffs, SpectralField, SpectralField)> {
        let coeffs = self.coefficients(f)?;
        let mut pf = apply_matrix(&self.generators, &coeffs.fields);
        pf.real = f.real;
        let micro = f.sub(&pf)?;
        Ok((coeffs, pf, micro))
    }

    pub fn moments(&self, f: &SpectralField) -> Result<MomentSet> {
        self.check(f)?;
        Ok(MomentSet { theta: apply_matrix(&self.theta_w, f), lambda: apply_matrix(&self.lambda_w, f) })
    }

    /// `(12, n_v)` weighted moment functions: the nine `Θ` rows, then `Λ`.
    pub fn moment_matrix(&self) -> Array2<f64> {
        ndarray::concatenate(Axis(0), &[self.theta_w.view(), self.lambda_w.view()]).expect("equal widths")
    }

    /// `-ξ·∇_x f`.
    pub fn streaming(&self, f: &SpectralField) -> SpectralField {
        let grid = &f.grid;
        let mut out = f.clone();
        for (mut row, xi) in out.values.axis_iter_mut(Axis(0)).zip(self.xi.axis_iter(Axis(0))) {
            for (k, v) in row.iter_mut().enumerate() {
                let kv = grid.k_vec(k);
                let s: f64 = (0..grid.dim()).map(|a| kv[a] * xi[a]).sum();
                *v *= Complex64::new(0.0, -s);
            }
        }
        out.zero_nyquist();
        out
    }

    fn check(&self, f: &SpectralField) -> Result<()> {
        if f.n_vel() != self.generators.nrows() {
            return Err(Error::GridMismatch(format!(
                "field has {} velocity rows, grid has {}",
                f.n_vel(),
                self.generators.nrows()
            )));
        }
        Ok(())
    }
}

/// Macroscopic decomposition `f = P f + {I-P} f`.
pub fn project(vg: &VelocityGrid, f: &SpectralField) -> Result<(MacroCoeffs, SpectralField, SpectralField)> {
    MomentOperators::new(vg).project(f)
}

/// `Θ_{im}(f)` and `Λ_i(f)`.
pub fn moments(vg: &VelocityGrid, f: &SpectralField) -> Result<MomentSet> {
    MomentOperators::new(vg).moments(f)
}

/// `L²_x` inner product of two real scalar fields.
pub fn inner_x(u: &SpectralField, v: &SpectralField) -> f64 {
    let vol = u.grid.volume();
    vol * u.values.iter().zip(v.values.iter()).map(|(a, b)| (a * b.conj()).re).sum::<f64>()
}

/// `𝓔^int_q(f)`.
pub fn interactive_functional(
    ops: &MomentOperators,
    sys: &DyadicSystem,
    f: &SpectralField,
    q: i32,
    params: &InteractiveParams,
) -> Result<f64> {
    let fq = sys.dyadic_block(q, f)?;
    let (coeffs, _, micro) = ops.project(&fq)?;
    let mom = ops.moments(&micro)?;
    let dim = f.grid.dim();
    let mut total = 0.0;
    for i in 0..dim {
        total += inner_x(&coeffs.c().derivative(i), &mom.lambda(i));
    }
    let mut t2 = 0.0;
    for i in 0..3 {
        for m in 0..3 {
            let mut grad = SpectralField::zeros(&f.grid, 1);
            if i < dim {
                grad = grad.add(&coeffs.b(m).derivative(i))?;
            }
            if m < dim {
                grad = grad.add(&coeffs.b(i).derivative(m))?;
            }
            t2 += inner_x(&grad, &mom.theta(i, m));
        }
    }
    let mut t3 = 0.0;
    for i in 0..dim {
        t3 += inner_x(&coeffs.a().derivative(i), &coeffs.b(i));
    }
    total += params.kappa1 * t2 + params.kappa2 * t3;
    Ok(total)
}

/// Max-in-time `L²_x` residuals of the five moment equations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct FluidResiduals {
    pub mass: f64,
    pub momentum: f64,
    pub energy: f64,
    pub theta: f64,
    pub lambda: f64,
}

impl FluidResiduals {
    pub fn max(&self) -> f64 {
        [self.mass, self.momentum, self.energy, self.theta, self.lambda].into_iter().fold(0.0, f64::max)
    }

    pub fn max_with(&self, o: &Self) -> Self {
        Self {
            mass: self.mass.max(o.mass),
            momentum: self.momentum.max(o.momentum),
            energy: self.energy.max(o.energy),
            theta: self.theta.max(o.theta),
            lambda: self.lambda.max(o.lambda),
        }
    }

    pub fn as_array(&self) -> [f64; 5] {
        [self.mass, self.momentum, self.energy, self.theta, self.lambda]
    }
}

/// Moment data of one snapshot entering the moment system.
#[derive(Debug, Clone)]
pub struct MomentFrame {
    pub time: f64,
    /// `(a, b, c)`.
    pub coeffs: SpectralField,
    /// `Θ({I-P}f)`, `Λ({I-P}f)`.
    pub theta: SpectralField,
    pub lambda: SpectralField,
    /// `Θ(r + h)`, `Λ(r + h)` with `r = -ξ·∇{I-P}f`, `h = -L{I-P}f + Γ(f, f)`.
    pub theta_src: SpectralField,
    pub lambda_src: SpectralField,
}

impl MomentFrame {
    /// `h` is the collision source `-L{I-P}f + Γ(f, f)`.
    pub fn new(ops: &MomentOperators, time: f64, f: &SpectralField, h: &SpectralField) -> Result<Self> {
        let (coeffs, _, micro) = ops.project(f)?;
        let mom = ops.moments(&micro)?;
        let src = ops.streaming(&micro).add(h)?;
        let smom = ops.moments(&src)?;
        Ok(Self {
            time,
            coeffs: coeffs.fields,
            theta: mom.theta,
            lambda: mom.lambda,
            theta_src: smom.theta,
            lambda_src: smom.lambda,
        })
    }

    /// Evaluates `h` with the operators of `tables`.
    pub fn from_tables(ops: &MomentOperators, tables: &CollisionTables, time: f64, f: &SpectralField) -> Result<Self> {
        let (_, _, micro) = ops.project(f)?;
        let lmicro = apply_field(tables, FieldOp::L, &micro, None)?;
        let gamma = apply_field(tables, FieldOp::Gamma, f, None)?;
        Self::new(ops, time, f, &gamma.sub(&lmicro)?)
    }
}

fn ik(grid: &crate::lp::FourierGrid, axis: usize, k: usize) -> Complex64 {
    if axis >= grid.dim() || grid.is_nyquist(k) {
        Complex64::default()
    } else {
        Complex64::new(0.0, grid.k_vec(k)[axis])
    }
}

/// `L²_x` residuals of the moment system at `cur`, with the time derivative
/// taken as the difference quotient between `lo` and `hi`.
pub fn frame_residuals(lo: &MomentFrame, cur: &MomentFrame, hi: &MomentFrame) -> FluidResiduals {
    let grid = cur.coeffs.grid.clone();
    let vol = grid.volume();
    let dt = hi.time - lo.time;
    let dtf = |sel: fn(&MomentFrame) -> &SpectralField, row: usize, k: usize| {
        (sel(hi).values[[row, k]] - sel(lo).values[[row, k]]) / dt
    };
    let co = |row: usize, k: usize| cur.coeffs.values[[row, k]];
    let (mut e1, mut e2, mut e3, mut e4, mut e5) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for k in 0..grid.len() {
        let d = |a: usize| ik(&grid, a, k);
        let div_b: Complex64 = (0..3).map(|i| d(i) * co(1 + i, k)).sum();
        e1 += (dtf(|f| &f.coeffs, 0, k) + div_b).norm_sqr();
        for i in 0..3 {
            let div_theta: Complex64 = (0..3).map(|m| d(m) * cur.theta.values[[3 * i + m, k]]).sum();
            let r2 = dtf(|f| &f.coeffs, 1 + i, k) + d(i) * (co(0, k) + 2.0 * co(4, k)) + div_theta;
            e2 += r2.norm_sqr();
        }
        let div_lambda: Complex64 = (0..3).map(|i| d(i) * cur.lambda.values[[i, k]]).sum();
        e3 += (dtf(|f| &f.coeffs, 4, k) + div_b / 3.0 + div_lambda * (5.0 / 3.0)).norm_sqr();
        for i in 0..3 {
            for m in 0..3 {
                let row = 3 * i + m;
                let mut r4 = dtf(|f| &f.theta, row, k) + d(i) * co(1 + m, k) + d(m) * co(1 + i, k)
                    - cur.theta_src.values[[row, k]];
                if i == m {
                    r4 += 2.0 * dtf(|f| &f.coeffs, 4, k);
                }
                e4 += r4.norm_sqr();
            }
            let r5 = dtf(|f| &f.lambda, i, k) + d(i) * co(4, k) - cur.lambda_src.values[[i, k]];
            e5 += r5.norm_sqr();
        }
    }
    FluidResiduals {
        mass: (vol * e1).sqrt(),
        momentum: (vol * e2).sqrt(),
        energy: (vol * e3).sqrt(),
        theta: (vol * e4).sqrt(),
        lambda: (vol * e5).sqrt(),
    }
}

/// Difference stencil `(lo, hi)` for snapshot `n` of `len`: centred inside,
/// one-sided at the ends.
pub fn difference_stencil(n: usize, len: usize) -> (usize, usize) {
    if n == 0 {
        (0, 1)
    } else if n + 1 == len {
        (n - 1, n)
    } else {
        (n - 1, n + 1)
    }
}

/// Residuals of the moment system at every snapshot of `traj`.
pub fn fluid_residual_series(traj: &DistributionTrajectory, tables: &CollisionTables) -> Result<Vec<FluidResiduals>> {
    if traj.len() < 2 {
        return Err(Error::Trajectory(format!("fluid residual needs at least 2 snapshots, got {}", traj.len())));
    }
    let ops = MomentOperators::new(tables.velocity_grid());
    let frames: Vec<MomentFrame> = traj
        .times()
        .iter()
        .zip(traj.fields())
        .map(|(&t, f)| MomentFrame::from_tables(&ops, tables, t, f))
        .collect::<Result<_>>()?;
    Ok((0..frames.len())
        .map(|n| {
            let (lo, hi) = difference_stencil(n, frames.len());
            frame_residuals(&frames[lo], &frames[n], &frames[hi])
        })
        .collect())
}

/// Max-in-time residuals of the moment system along `traj`.
pub fn fluid_residual(traj: &DistributionTrajectory, tables: &CollisionTables) -> Result<FluidResiduals> {
    let series = fluid_residual_series(traj, tables)?;
    Ok(series.iter().fold(FluidResiduals::default(), |acc, r| acc.max_with(r)))
}
