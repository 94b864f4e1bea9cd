//! The registry of estimates and their evaluators.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::collision::{apply_field, apply_matrix, FieldOp, KernelParams, PolynomialBasis};
use crate::error::{Error, Result};
use crate::lp::SpectralField;
use crate::norms::{
    block_powers, block_row_norms, chemin_lerner_norm, classical_norm, energy_functionals, trapezoid_weights,
    weighted_lp, BesovSpec, CLSpec, DistributionTrajectory, EnergyFunctionals, ENERGY_INDEX,
};
use crate::solver::{Evolver, SolverConfig};
use crate::verify::level::{Level, VerifyGrids};
use crate::verify::report::{Direction, InequalityReport, LevelSummary, SuiteReport, TrialRecord, DRIFT_LIMIT, EXACT_SLACK};
use crate::verify::sample::{sample_coefficients, sample_field, trial_rng, FieldClass, TrialSpec};

/// Short solver runs feeding the trajectory-class checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrajectoryRuns {
    /// `L²_{x,ξ}` size of the initial data.
    pub amplitude: f64,
    pub t_final: f64,
    pub dt: f64,
}

impl Default for TrajectoryRuns {
    fn default() -> Self {
        Self { amplitude: 1e-2, t_final: 0.1, dt: 0.025 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    /// Seed, trial count, decay and amplitude. Each check draws from its own
    /// field class, so `trials.field_class` is not consulted.
    pub trials: TrialSpec,
    pub grids: VerifyGrids,
    pub kernel: KernelParams,
    /// Sampled modes satisfy `|l|_∞ ≤ band`.
    pub band: u32,
    /// Regularity of the trilinear checks.
    pub s_trilinear: f64,
    /// Regularity of the moment checks and of the Bernstein check.
    pub s_moment: f64,
    /// Length of sampled trajectories.
    pub horizon: f64,
    pub time_samples: usize,
    pub runs: TrajectoryRuns,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            trials: TrialSpec::default(),
            grids: VerifyGrids::default(),
            kernel: KernelParams::default(),
            band: 3,
            s_trilinear: 1.5,
            s_moment: 0.5,
            horizon: 1.0,
            time_samples: 5,
            runs: TrajectoryRuns::default(),
        }
    }
}

impl VerifyConfig {
    pub fn validate(&self) -> Result<()> {
        self.trials.validate()?;
        self.kernel.validate()?;
        for (name, s) in [("s_trilinear", self.s_trilinear), ("s_moment", self.s_moment)] {
            if !(s > 0.0 && s <= 1.5) {
                return Err(Error::InvalidParameter(format!("{name} = {s} outside (0, 3/2]")));
            }
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) || self.time_samples < 2 {
            return Err(Error::InvalidParameter("trajectories need a positive horizon and two samples".into()));
        }
        if !(self.runs.amplitude >= 0.0 && self.runs.amplitude.is_finite()) {
            return Err(Error::InvalidParameter(format!("run amplitude = {}", self.runs.amplitude)));
        }
        self.solver().validate()
    }

    pub fn solver(&self) -> SolverConfig {
        SolverConfig { dt: self.runs.dt, t_final: self.runs.t_final, snapshot_interval: self.runs.dt, ..SolverConfig::default() }
    }
}

/// One registered estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegistryEntry {
    pub id: &'static str,
    pub anchor: &'static str,
    pub direction: Direction,
    pub exact: bool,
    pub class: FieldClass,
    pub pieces: &'static [&'static str],
    pub caveat: Option<&'static str>,
}

const SUP_CAVEAT: &str = "L^inf_x is the maximum over grid points; the continuum supremum may be larger";

const fn entry(id: &'static str, anchor: &'static str, direction: Direction, class: FieldClass) -> RegistryEntry {
    RegistryEntry { id, anchor, direction, exact: false, class, pieces: &[], caveat: None }
}

/// Every checkable estimate, in report order.
pub fn registry() -> Vec<RegistryEntry> {
    use Direction::*;
    use FieldClass::*;
    vec![
        RegistryEntry {
            caveat: Some(SUP_CAVEAT),
            ..entry("TRILINEAR", "three suitably smooth distribution functions", Upper, General)
        },
        RegistryEntry {
            pieces: &["X=B", "X=Bdot"],
            ..entry("TRILINEAR_X", "homogeneous critical Besov space", Upper, General)
        },
        RegistryEntry {
            pieces: &["Pf_g:B", "Pf_g:Bdot", "f_Pg:B", "f_Pg:Bdot", "Pf_Pg:B", "Pf_Pg:Bdot"],
            ..entry("TRILINEAR_P", "an immediate corollary", Upper, General)
        },
        RegistryEntry {
            pieces: &["PP", "P_micro", "micro_P", "micro_micro"],
            ..entry("NONLIN_ENERGY", "sqrt(E_T(f)) D_T(f)", Upper, General)
        },
        entry("MOMENT_BOUND", "zeta = zeta(xi) in S", Upper, General),
        entry("L_UPPER", "an estimate on the upper bound of the linear term", Upper, General),
        entry("MACRO_DISS", "the macroscopic dissipation rate", Upper, Trajectory),
        entry("APRIORI", "There is indeed an energy functional", Upper, Trajectory),
        entry("COERCIVITY", "(Delta_q L f, Delta_q f) >= lambda_0 |{I-P} Delta_q f|^2", Lower, Microscopic),
        entry("K_BOUND", "a constant independent of q, f and g", Upper, General),
        RegistryEntry {
            pieces: &["p=1", "p=2", "p=inf"],
            ..entry("BLOCK_BOUND", "a constant independent of p and q", Upper, General)
        },
        RegistryEntry {
            exact: true,
            pieces: &["rho=2", "rho=inf"],
            ..entry("BERNSTEIN_EQUIV", "|grad_x .| ~ |.|", Range { lo: 0.75, hi: 8.0 / 3.0 }, General)
        },
        RegistryEntry {
            pieces: &["rho=2", "rho=inf"],
            ..entry("NH_EMBED", "homogeneous and inhomogeneous Chemin-Lerner spaces", Upper, General)
        },
        RegistryEntry {
            exact: true,
            pieces: &["r=1;rho1=2", "r=1;rho1=inf", "r=inf;rho1=2", "r=inf;rho1=inf"],
            ..entry("CL_ORDER", "may be linked with the classical spaces", Upper, General)
        },
        RegistryEntry {
            exact: true,
            pieces: &["convolution", "c1_l1"],
            ..entry("SERIES_CONV", "convolution inequality for series", Upper, General)
        },
    ]
}

pub fn lookup(id: &str) -> Result<RegistryEntry> {
    registry().into_iter().find(|e| e.id == id).ok_or_else(|| Error::UnknownCheck(id.to_string()))
}

/// Values of one trial; `ratios` lists the variants when there are several.
struct Eval {
    lhs: f64,
    rhs: f64,
    pieces: Vec<f64>,
}

impl Eval {
    fn single(lhs: f64, rhs: f64) -> Self {
        Self { lhs, rhs, pieces: Vec::new() }
    }

    /// Keeps the variant with the largest ratio, recording every ratio.
    fn worst_of(variants: &[(f64, f64)]) -> Self {
        let ratios: Vec<f64> = variants.iter().map(|&(l, r)| ratio(l, r)).collect();
        let k = (0..ratios.len()).fold(0, |b, i| if ratios[i] > ratios[b] { i } else { b });
        Self { lhs: variants[k].0, rhs: variants[k].1, pieces: ratios }
    }
}

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 && rhs == 0.0 {
        0.0
    } else {
        lhs / rhs
    }
}

type Traj = DistributionTrajectory;

struct Ctx<'a> {
    level: &'a Level,
    cfg: &'a VerifyConfig,
    evolver: Option<Evolver<'a>>,
}

impl<'a> Ctx<'a> {
    fn new(level: &'a Level, cfg: &'a VerifyConfig, class: FieldClass) -> Result<Self> {
        let evolver = if class == FieldClass::Trajectory {
            Some(Evolver::new(&level.grid, &level.tables, &cfg.solver())?)
        } else {
            None
        };
        Ok(Self { level, cfg, evolver })
    }

    fn spec(&self, class: FieldClass) -> TrialSpec {
        TrialSpec { field_class: class, ..self.cfg.trials }
    }

    fn times(&self) -> Vec<f64> {
        let n = self.cfg.time_samples;
        (0..n).map(|i| self.cfg.horizon * i as f64 / (n - 1) as f64).collect()
    }

    fn field(&self, trial: usize, sub: u64, class: FieldClass, basis: &PolynomialBasis) -> Result<SpectralField> {
        let l = self.level;
        sample_field(&self.spec(class), trial, sub, &l.grid, basis, &l.ops, self.cfg.band)
    }

    /// `f(t) = A + (t/T) B` with independent draws `A`, `B` in the Galerkin span.
    fn traj(&self, trial: usize, slot: u64, class: FieldClass) -> Result<Traj> {
        let b = &self.level.basis;
        let a = self.field(trial, 2 * slot, class, b)?;
        let d = self.field(trial, 2 * slot + 1, class, b)?;
        let times = self.times();
        let fields = times.iter().map(|t| a.add(&d.scaled(t / self.cfg.horizon))).collect::<Result<Vec<_>>>()?;
        self.level.trajectory(&times, fields)
    }

    /// Solver run from a sampled initial datum; returns `(f₀, trajectory)`.
    fn run(&self, trial: usize) -> Result<(SpectralField, Traj)> {
        let spec = TrialSpec { amplitude: self.cfg.runs.amplitude, ..self.spec(FieldClass::General) };
        let l = self.level;
        let f0 = sample_field(&spec, trial, 0, &l.grid, &l.basis, &l.ops, self.cfg.band)?;
        let ev = self.evolver.as_ref().expect("trajectory checks build an evolver");
        Ok((f0.clone(), ev.run(&f0)?))
    }

    /// `‖f‖_{L̃^ρ_T L̃²_{ξ,ν}(B^s)}` (`nu`) or `‖f‖_{L̃^ρ_T L̃²_ξ(B^s)}`.
    fn cl(&self, f: &Traj, rho: f64, s: f64, nu: bool) -> Result<f64> {
        self.level.cl(f, rho, s, nu, false)
    }

    fn cl_hom(&self, f: &Traj, rho: f64, s: f64, nu: bool, homogeneous: bool) -> Result<f64> {
        self.level.cl(f, rho, s, nu, homogeneous)
    }

    /// `max_ζ Σ_q 2^{qs} ‖Δ_q (x, ζ)_ξ‖_{L²_T L²_x}` over the moment functions
    /// `(ξ_iξ_m - δ_{im})√μ` and `(|ξ|²-5)ξ_i√μ/10`, given the twelve moment
    /// rows (`Θ` then `Λ`) of each snapshot.
    fn moment_norm(&self, times: &[f64], rows: &[SpectralField], s: f64) -> Result<f64> {
        let l = self.level;
        let tw = trapezoid_weights(times);
        // [t][q][row]
        let cube: Vec<Vec<Vec<f64>>> =
            rows.iter().map(|m| block_row_norms(&l.sys, m, 2.0, false)).collect::<Result<_>>()?;
        let blocks: Vec<i32> = l.sys.blocks().collect();
        Ok((0..12)
            .map(|row| {
                blocks
                    .iter()
                    .enumerate()
                    .map(|(bi, &q)| {
                        let per_t: Vec<f64> = cube.iter().map(|c| c[bi][row]).collect();
                        2f64.powf(q as f64 * s) * weighted_lp(&per_t, &tw, 2.0)
                    })
                    .sum::<f64>()
            })
            .fold(0.0, f64::max))
    }
}

fn sqrt(v: f64) -> f64 {
    v.max(0.0).sqrt()
}

/// `Σ_q 2^{3q/2} ‖Δ_q f₀‖_{L²_ξ L²_x}`.
fn initial_energy(ctx: &Ctx, f0: &SpectralField) -> Result<f64> {
    let t = DistributionTrajectory::single(f0.clone(), Some(ctx.level.velocity().clone()))?;
    ctx.cl(&t, f64::INFINITY, ENERGY_INDEX, false)
}

fn trilinear(ctx: &Ctx, trial: usize) -> Result<Eval> {
    let s = ctx.cfg.s_trilinear;
    let l = ctx.level;
    let (f, g, h) = (ctx.traj(trial, 0, FieldClass::General)?, ctx.traj(trial, 1, FieldClass::General)?, ctx.traj(trial, 2, FieldClass::General)?);
    let lhs = l.gamma_pairing(&f, &g, &h, s)?;
    let nu2 = |x: &Traj| ctx.cl(x, 2.0, s, true);
    let inf = |x: &Traj| ctx.cl(x, f64::INFINITY, s, false);
    let sup_inf = |x: &Traj| l.sup_norm(x, f64::INFINITY, false);
    let sup_nu2 = |x: &Traj| l.sup_norm(x, 2.0, true);
    let rhs = sqrt(nu2(&h)?)
        * (sqrt(nu2(&g)?) * sqrt(sup_inf(&f)) + sqrt(sup_nu2(&f)) * sqrt(inf(&g)?)
            + sqrt(nu2(&f)?) * sqrt(sup_inf(&g)) + sqrt(sup_nu2(&g)) * sqrt(inf(&f)?));
    Ok(Eval::single(lhs, rhs))
}

fn trilinear_x(ctx: &Ctx, trial: usize) -> Result<Eval> {
    let s = ctx.cfg.s_trilinear;
    let l = ctx.level;
    let (f, g, h) = (ctx.traj(trial, 0, FieldClass::General)?, ctx.traj(trial, 1, FieldClass::General)?, ctx.traj(trial, 2, FieldClass::General)?);
    let lhs = l.gamma_pairing(&f, &g, &h, s)?;
    let nu2 = |x: &Traj| ctx.cl(x, 2.0, s, true);
    let inf = |x: &Traj| ctx.cl(x, f64::INFINITY, s, false);
    let mut variants = Vec::new();
    for hom in [false, true] {
        let x_inf = |x: &Traj| ctx.cl_hom(x, f64::INFINITY, ENERGY_INDEX, false, hom);
        let x_nu2 = |x: &Traj| ctx.cl_hom(x, 2.0, ENERGY_INDEX, true, hom);
        let rhs = sqrt(nu2(&h)?)
            * (sqrt(nu2(&g)?) * sqrt(x_inf(&f)?) + sqrt(x_nu2(&f)?) * sqrt(inf(&g)?)
                + sqrt(nu2(&f)?) * sqrt(x_inf(&g)?) + sqrt(x_nu2(&g)?) * sqrt(inf(&f)?));
        variants.push((lhs, rhs));
    }
    Ok(Eval::worst_of(&variants))
}

fn trilinear_p(ctx: &Ctx, trial: usize) -> Result<Eval> {
    let s = ctx.cfg.s_trilinear;
    let l = ctx.level;
    let (f, g, h) = (ctx.traj(trial, 0, FieldClass::General)?, ctx.traj(trial, 1, FieldClass::General)?, ctx.traj(trial, 2, FieldClass::General)?);
    let (pf, _) = l.split(&f)?;
    let (pg, _) = l.split(&g)?;
    let nu2 = |x: &Traj| ctx.cl(x, 2.0, s, true);
    let plain2 = |x: &Traj| ctx.cl(x, 2.0, s, false);
    let inf = |x: &Traj| ctx.cl(x, f64::INFINITY, s, false);
    let hh = sqrt(nu2(&h)?);
    let lhs1 = l.gamma_pairing(&pf, &g, &h, s)?;
    let lhs2 = l.gamma_pairing(&f, &pg, &h, s)?;
    let lhs3 = l.gamma_pairing(&pf, &pg, &h, s)?;
    let mut v = Vec::with_capacity(6);
    for (k, lhs) in [lhs1, lhs2, lhs3].into_iter().enumerate() {
        for hom in [false, true] {
            let x = |t: &Traj, rho: f64, nu: bool| ctx.cl_hom(t, rho, ENERGY_INDEX, nu, hom);
            let rhs = match k {
                0 => hh * (sqrt(nu2(&g)?) * sqrt(x(&pf, f64::INFINITY, false)?) + sqrt(x(&g, 2.0, true)?) * sqrt(inf(&pf)?)),
                1 => hh * (sqrt(nu2(&f)?) * sqrt(x(&pg, f64::INFINITY, false)?) + sqrt(x(&f, 2.0, true)?) * sqrt(inf(&pg)?)),
                _ => hh * (sqrt(inf(&pg)?) * sqrt(x(&pf, 2.0, false)?) + sqrt(x(&pg, f64::INFINITY, false)?) * sqrt(plain2(&pf)?)),
            };
            v.push((lhs, rhs));
        }
    }
    let mut e = Eval::worst_of(&v);
    // pieces are ordered estimate-major, matching the registry labels
    e.pieces = v.iter().map(|&(a, b)| ratio(a, b)).collect();
    Ok(e)
}

fn nonlin_energy(ctx: &Ctx, trial: usize) -> Result<Eval> {
    let s = ENERGY_INDEX;
    let l = ctx.level;
    let f = ctx.traj(trial, 0, FieldClass::General)?;
    let (pf, micro) = l.split(&f)?;
    let func = energy_functionals(&l.sys, &f, &l.tables)?;
    let lhs = l.gamma_pairing(&f, &f, &micro, s)?;
    let rhs = sqrt(func.e_t) * func.d_t;
    let m_nu = ctx.cl(&micro, 2.0, s, true)?;
    let m_inf = ctx.cl(&micro, f64::INFINITY, s, false)?;
    let p_inf = ctx.cl(&pf, f64::INFINITY, s, false)?;
    let p_hom = ctx.cl_hom(&pf, 2.0, s, false, true)?;
    let pieces = vec![
        ratio(l.gamma_pairing(&pf, &pf, &micro, s)?, sqrt(p_hom) * sqrt(p_inf) * sqrt(m_nu)),
        ratio(l.gamma_pairing(&pf, &micro, &micro, s)?, m_nu * sqrt(p_inf)),
        ratio(l.gamma_pairing(&micro, &pf, &micro, s)?, m_nu * sqrt(p_inf)),
        ratio(l.gamma_pairing(&micro, &micro, &micro, s)?, sqrt(m_inf) * m_nu),
    ];
    Ok(Eval { lhs, rhs, pieces })
}

fn moment_bound(ctx: &Ctx, trial: usize) -> Result<Eval> {
    let l = ctx.level;
    let f = ctx.traj(trial, 0, FieldClass::General)?;
    let func = energy_functionals(&l.sys, &f, &l.tables)?;
    let rows: Vec<SpectralField> = f.fields().iter().map(|x| l.gamma_moments(x, x)).collect();
    let lhs = ctx.moment_norm(f.times(), &rows, ctx.cfg.s_moment)?;
    Ok(Eval::single(lhs, func.e_t * func.d_t))
}

fn l_upper(ctx: &Ctx, trial: usize) -> Result<Eval> {
    let l = ctx.level;
    let s = ctx.cfg.s_moment;
    let f = ctx.traj(trial, 0, FieldClass::General)?;
    let (_, micro) = l.split(&f)?;
    let moments = l.ops.moment_matrix();
    let rows: Vec<SpectralField> = micro.fields().iter().map(|x| apply_matrix(&moments, &l.apply_l_in_span(x))).collect();
    Ok(Eval::single(ctx.moment_norm(micro.times(), &rows, s)?, ctx.cl(&micro, 2.0, s, true)?))
}

/// `(𝓔(f₀), functionals)` of the solver run of `trial`, shared by the
/// trajectory checks.
fn run_functionals(ctx: &Ctx, trial: usize) -> Result<(f64, EnergyFunctionals)> {
    let c = ctx.cfg;
    let key = format!("{trial}|{:?}|{:?}|{}", c.runs, c.trials, c.band);
    ctx.level.run_summary(key, || {
        let (f0, traj) = ctx.run(trial)?;
        Ok((initial_energy(ctx, &f0)?, energy_functionals(&ctx.level.sys, &traj, &ctx.level.tables)?))
    })
}

fn macro_diss(ctx: &Ctx, trial: usize) -> Result<Eval> {
    let (e0, func) = run_functionals(ctx, trial)?;
    Ok(Eval::single(func.d_macro, e0 + func.e_t + func.d_micro + func.e_t * func.d_t))
}

fn apriori(ctx: &Ctx, trial: usize) -> Result<Eval> {
    let (e0, func) = run_functionals(ctx, trial)?;
    Ok(Eval::single(func.e_t + func.d_t, e0 + (sqrt(func.e_t) + func.e_t) * func.d_t))
}

/// Smallest block Rayleigh quotient `(Δ_q L f, Δ_q f) / ‖{I-P}Δ_q f‖²_ν`.
fn coercivity(ctx: &Ctx, trial: usize) -> Result<Eval> {
    let l = ctx.level;
    let f = ctx.field(trial, 0, FieldClass::Microscopic, &l.rich_basis)?;
    let lf = apply_field(&l.tables, FieldOp::L, &f, None)?;
    let num = l.block_inner(&lf, &f)?;
    let den = block_powers(&l.sys, &l.ops, &l.tables, &f)?.micro_nu;
    let total: f64 = den.iter().sum();
    let mut best: Option<(f64, f64)> = None;
    for (n, d) in num.into_iter().zip(den) {
        if d > 1e-14 * total && best.is_none_or(|(bn, bd)| n / d < bn / bd) {
            best = Some((n, d));
        }
    }
    let (lhs, rhs) = best.unwrap_or((0.0, 0.0));
    Ok(Eval::single(lhs, rhs))
}

/// Largest block ratio `|(Δ_q K f, Δ_q g)| / (‖Δ_q f‖ ‖Δ_q g‖)`.
fn k_bound(ctx: &Ctx, trial: usize) -> Result<Eval> {
    let l = ctx.level;
    let f = ctx.field(trial, 0, FieldClass::General, &l.rich_basis)?;
    let g = ctx.field(trial, 1, FieldClass::General, &l.rich_basis)?;
    let kf = apply_field(&l.tables, FieldOp::K, &f, None)?;
    let num = l.block_inner(&kf, &g)?;
    let nf = l.block_inner(&f, &f)?;
    let ng = l.block_inner(&g, &g)?;
    let v: Vec<(f64, f64)> = num.iter().zip(nf.iter().zip(&ng)).map(|(n, (a, b))| (n.abs(), sqrt(*a) * sqrt(*b))).collect();
    let mut e = Eval::worst_of(&v);
    e.pieces.clear();
    Ok(e)
}

/// `max_q ‖Δ_q u‖_p / ‖u‖_p` and `max_q ‖S_q u‖_p / ‖u‖_p` for scalar `u`.
fn block_bound(ctx: &Ctx, trial: usize) -> Result<Eval> {
    let l = ctx.level;
    let mut rng = trial_rng(ctx.cfg.trials.seed, trial, 0);
    let u = sample_coefficients(&l.grid, &[1.0], ctx.cfg.band, ctx.cfg.trials.spectral_decay, &mut rng)?;
    let cell = vec![l.grid.cell_volume(); l.grid.len()];
    let lp = |f: &SpectralField, p: f64| weighted_lp(f.to_physical().row(0).as_slice().expect("row"), &cell, p);
    let mut per_p = Vec::with_capacity(3);
    for p in [1.0, 2.0, f64::INFINITY] {
        let base = lp(&u, p);
        let mut worst = (0.0, base);
        for row in block_row_norms(&l.sys, &u, p, false)? {
            if ratio(row[0], base) > ratio(worst.0, worst.1) {
                worst = (row[0], base);
            }
        }
        for q in 0..=l.sys.q_max() + 1 {
            let sq = lp(&l.sys.low_pass(q, &u)?, p);
            if ratio(sq, base) > ratio(worst.0, worst.1) {
                worst = (sq, base);
            }
        }
        per_p.push(worst);
    }
    Ok(Eval::worst_of(&per_p))
}

/// Gradient norm through `|k| f̂`: for `p = 2` every block of `∇_x f` has the
/// norm of the same block of `|D| f`.
fn abs_derivative(f: &SpectralField) -> SpectralField {
    let m: Vec<f64> = (0..f.grid.len()).map(|k| if f.grid.is_nyquist(k) { 0.0 } else { f.grid.k_norm(k) }).collect();
    f.apply_multiplier(&m)
}

fn bernstein(ctx: &Ctx, trial: usize) -> Result<Eval> {
    let l = ctx.level;
    let s = ctx.cfg.s_moment;
    let f = ctx.traj(trial, 0, FieldClass::General)?;
    let df = l.map(&f, |x| Ok(abs_derivative(x)))?;
    let mut v = Vec::new();
    for rho in [2.0, f64::INFINITY] {
        v.push((ctx.cl_hom(&df, rho, s, false, true)?, ctx.cl_hom(&f, rho, s + 1.0, false, true)?));
    }
    let pieces: Vec<f64> = v.iter().map(|&(a, b)| ratio(a, b)).collect();
    Ok(Eval { lhs: v[0].0, rhs: v[0].1, pieces })
}

fn nh_embed(ctx: &Ctx, trial: usize) -> Result<Eval> {
    let s = ctx.cfg.s_trilinear;
    let f = ctx.traj(trial, 0, FieldClass::General)?;
    let mut v = Vec::new();
    for rho in [2.0, f64::INFINITY] {
        v.push((ctx.cl_hom(&f, rho, s, false, true)?, ctx.cl_hom(&f, rho, s, false, false)?));
    }
    Ok(Eval::worst_of(&v))
}

/// Both orderings between Chemin-Lerner and classical norms with `ρ2 = 2`.
fn cl_order(ctx: &Ctx, trial: usize) -> Result<Eval> {
    let l = ctx.level;
    let s = ctx.cfg.s_trilinear;
    let f = ctx.traj(trial, 0, FieldClass::General)?;
    let mut v = Vec::new();
    for r in [1.0, f64::INFINITY] {
        for rho1 in [2.0, f64::INFINITY] {
            let spec = CLSpec::new(rho1, 2.0, BesovSpec::new(s, 2.0, r));
            let cl = chemin_lerner_norm(&l.sys, &f, &spec, None)?;
            let classical = classical_norm(&l.sys, &f, &spec, None)?;
            // r ≤ min(ρ1, ρ2) puts the Chemin-Lerner norm on top, r ≥ max below
            v.push(if r == 1.0 { (classical, cl) } else { (cl, classical) });
        }
    }
    Ok(Eval::worst_of(&v))
}

/// `Σ_q Σ_{|j-q|≤4} 2^{(q-j)s} c₁(j) ≤ ‖1_{|j|≤4} 2^{js}‖_{ℓ¹} ‖c₁‖_{ℓ¹}` with
/// `c₁(j) = 2^{js} ‖|ξ|^{γ/2} Δ_j g‖_{L²_T L²_ξ L²_x} / ‖g‖_{L̃²_T L̃²_{ξ,ν}(B^s)}`,
/// together with `‖c₁‖_{ℓ¹} ≤ 1`.
fn series_conv(ctx: &Ctx, trial: usize) -> Result<Eval> {
    let l = ctx.level;
    let s = ctx.cfg.s_trilinear;
    let g = ctx.traj(trial, 0, FieldClass::General)?;
    let gamma = ctx.cfg.kernel.gamma;
    let weights: Vec<f64> = l.velocity().nodes().iter().map(|v| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt().powf(gamma)).collect();
    let w = l.weight();
    let tw = trapezoid_weights(g.times());
    let blocks: Vec<i32> = l.sys.blocks().collect();
    let mut integral = vec![0.0; blocks.len()];
    for (f, wt) in g.fields().iter().zip(&tw) {
        let rows = block_row_norms(&l.sys, f, 2.0, false)?;
        for (acc, row) in integral.iter_mut().zip(rows) {
            *acc += wt * w * row.iter().zip(&weights).map(|(n, c)| c * n * n).sum::<f64>();
        }
    }
    let denom = ctx.cl(&g, 2.0, s, true)?;
    let c1: Vec<f64> = blocks.iter().zip(&integral).map(|(&j, v)| if denom > 0.0 { 2f64.powf(j as f64 * s) * v.sqrt() / denom } else { 0.0 }).collect();
    let (jmin, jmax) = (blocks[0], *blocks.last().expect("blocks"));
    let mut lhs = 0.0;
    for q in jmin..=jmax + 4 {
        for (bi, &j) in blocks.iter().enumerate() {
            if (j - q).abs() <= 4 {
                lhs += 2f64.powf((q - j) as f64 * s) * c1[bi];
            }
        }
    }
    let kernel: f64 = (-4..=4).map(|j| 2f64.powf(j as f64 * s)).sum();
    let c1_sum: f64 = c1.iter().sum();
    Ok(Eval::worst_of(&[(lhs, kernel * c1_sum), (c1_sum, if denom > 0.0 { 1.0 } else { 0.0 })]))
}

fn evaluator(id: &str) -> fn(&Ctx, usize) -> Result<Eval> {
    match id {
        "TRILINEAR" => trilinear,
        "TRILINEAR_X" => trilinear_x,
        "TRILINEAR_P" => trilinear_p,
        "NONLIN_ENERGY" => nonlin_energy,
        "MOMENT_BOUND" => moment_bound,
        "L_UPPER" => l_upper,
        "MACRO_DISS" => macro_diss,
        "APRIORI" => apriori,
        "COERCIVITY" => coercivity,
        "K_BOUND" => k_bound,
        "BLOCK_BOUND" => block_bound,
        "BERNSTEIN_EQUIV" => bernstein,
        "NH_EMBED" => nh_embed,
        "CL_ORDER" => cl_order,
        "SERIES_CONV" => series_conv,
        other => unreachable!("registry id {other} without evaluator"),
    }
}

fn within(entry: &RegistryEntry, r: f64) -> bool {
    match entry.direction {
        Direction::Upper => r <= 1.0 + EXACT_SLACK,
        Direction::Lower => r >= 1.0 - EXACT_SLACK,
        Direction::Range { lo, hi } => r >= lo - EXACT_SLACK && r <= hi + EXACT_SLACK,
    }
}

/// Runs every trial of `entry` on one resolution.
pub fn run_level(entry: &RegistryEntry, cfg: &VerifyConfig, level: &Level) -> Result<LevelSummary> {
    cfg.validate()?;
    let ctx = Ctx::new(level, cfg, entry.class)?;
    let eval = evaluator(entry.id);
    let evals: Vec<Eval> = (0..cfg.trials.n_trials).into_par_iter().map(|t| eval(&ctx, t)).collect::<Result<_>>()?;
    let (mut trials, mut skipped, mut violations) = (Vec::new(), 0, 0);
    for (trial, e) in evals.into_iter().enumerate() {
        if e.lhs == 0.0 && e.rhs == 0.0 {
            skipped += 1;
            continue;
        }
        let r = ratio(e.lhs, e.rhs);
        let mut bad = !r.is_finite() || e.rhs <= 0.0 || e.pieces.iter().any(|p| !p.is_finite());
        if entry.exact {
            let all: Vec<f64> = if e.pieces.is_empty() { vec![r] } else { e.pieces.clone() };
            bad |= !all.iter().all(|&p| within(entry, p));
        }
        violations += bad as usize;
        trials.push(TrialRecord { trial, lhs: e.lhs, rhs: e.rhs, ratio: r, pieces: e.pieces });
    }
    let ratios = || trials.iter().flat_map(|t| if t.pieces.is_empty() { vec![t.ratio] } else { t.pieces.clone() });
    let max_ratio = ratios().fold(f64::NEG_INFINITY, f64::max);
    let min_ratio = ratios().fold(f64::INFINITY, f64::min);
    let fitted_c = match entry.direction {
        Direction::Lower => trials.iter().map(|t| t.ratio).fold(f64::INFINITY, f64::min),
        _ => trials.iter().map(|t| t.ratio).fold(f64::NEG_INFINITY, f64::max),
    };
    let piece_fitted = (0..entry.pieces.len())
        .map(|k| trials.iter().filter_map(|t| t.pieces.get(k).copied()).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    Ok(LevelSummary {
        x_points: level.spec.x_points,
        v_points: level.spec.v_points,
        trials,
        skipped,
        violations,
        max_ratio,
        min_ratio,
        fitted_c,
        piece_fitted,
    })
}

/// Evaluates `id` on `base` and, when given, on the doubled resolution.
pub fn run_check(id: &str, cfg: &VerifyConfig, base: &Level, doubled: Option<&Level>) -> Result<InequalityReport> {
    let entry = lookup(id)?;
    let b = run_level(&entry, cfg, base)?;
    let refined = doubled.map(|d| run_level(&entry, cfg, d)).transpose()?;
    let drift = refined.as_ref().map(|r| {
        let (c1, c2) = (b.fitted_c, r.fitted_c);
        if c1 > 0.0 && c2 > 0.0 { (c2 / c1).max(c1 / c2) } else { f64::INFINITY }
    });
    let levels = std::iter::once(&b).chain(refined.as_ref());
    let mut passed = true;
    for lvl in levels {
        passed &= lvl.violations == 0;
        if !entry.exact && !lvl.trials.is_empty() {
            passed &= lvl.fitted_c.is_finite();
            if entry.direction == Direction::Lower {
                passed &= lvl.fitted_c > 0.0;
            }
        }
    }
    if !entry.exact {
        passed &= drift.is_none_or(|d| d < DRIFT_LIMIT);
    }
    Ok(InequalityReport {
        id: entry.id.into(),
        anchor: entry.anchor.into(),
        direction: entry.direction,
        exact: entry.exact,
        piece_labels: entry.pieces.iter().map(|s| s.to_string()).collect(),
        base: b,
        refined,
        refinement_drift: drift,
        caveat: entry.caveat.map(String::from),
        passed,
    })
}

/// Builds the base and doubled levels of `cfg`.
pub fn build_levels(cfg: &VerifyConfig) -> Result<(Level, Option<Level>)> {
    cfg.validate()?;
    let g = &cfg.grids;
    let base = Level::build(g, g.base, &cfg.kernel)?;
    let doubled = g.doubled.map(|d| Level::build(g, d, &cfg.kernel)).transpose()?;
    Ok((base, doubled))
}

/// Runs the listed entries (all of them for `None`) with shared seeds.
pub fn full_suite(cfg: &VerifyConfig, only: Option<&[String]>) -> Result<SuiteReport> {
    let ids: Vec<String> = match only {
        Some(list) => {
            for id in list {
                lookup(id)?;
            }
            list.to_vec()
        }
        None => registry().iter().map(|e| e.id.to_string()).collect(),
    };
    let (base, doubled) = build_levels(cfg)?;
    let reports = ids.iter().map(|id| run_check(id, cfg, &base, doubled.as_ref())).collect::<Result<Vec<_>>>()?;
    Ok(SuiteReport::new(cfg.trials.seed, cfg.trials.n_trials, reports))
}
