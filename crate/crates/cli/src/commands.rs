//! Subcommand drivers. Each returns the process exit status.

use std::fs;
use std::path::{Path, PathBuf};

use kinlab::collision::{build_tables, CollisionTables};
use kinlab::io::FieldFile;
use kinlab::lp::{DyadicSystem, SpectralField, DEFAULT_SHARPNESS};
use kinlab::norms::{besov_norm, BesovSpec};
use kinlab::solver::{direct_solve, initial_data, picard_iterate, PicardReport};
use kinlab::verify::full_suite;
use kinlab::{Error, Result};
use serde::Serialize;

use crate::config::{RunConfig, RunMode};
use crate::manifest::{Manifest, RunStatus};

/// Process exit status of a failed command.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidGrid(_) | Error::InvalidParameter(_) | Error::UnknownCheck(_) | Error::Format(_) | Error::Json(_) => 2,
        Error::Diverged { .. } => 3,
        _ => 1,
    }
}

fn out_dir(cfg: &RunConfig, flag: Option<&Path>) -> Result<PathBuf> {
    let dir = flag.map_or_else(|| PathBuf::from(&cfg.out_dir), Path::to_path_buf);
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

fn tables_for(cfg: &RunConfig) -> Result<CollisionTables> {
    build_tables(&cfg.grids.velocity()?, &cfg.grids.sphere()?, &cfg.kernel)
}

#[derive(Serialize)]
struct DirectSummary {
    steps: usize,
    initial_energy: f64,
    functionals: kinlab::norms::EnergyFunctionals,
    min_positivity_margin: f64,
    max_residuals: kinlab::macroscopic::FluidResiduals,
}

fn picard_csv(r: &PicardReport) -> String {
    let mut out = String::from("sweep,ytilde,difference,contraction\n");
    for (n, y) in r.ytilde.iter().enumerate() {
        let d = n.checked_sub(1).and_then(|m| r.differences.get(m)).copied().unwrap_or(f64::NAN);
        let c = n.checked_sub(2).and_then(|m| r.contraction.get(m)).copied().unwrap_or(f64::NAN);
        out.push_str(&format!("{n},{y:.12e},{d:.12e},{c:.12e}\n"));
    }
    out
}

fn write_snapshots(dir: &Path, traj: &kinlab::norms::DistributionTrajectory, vel: (f64, usize)) -> Result<Vec<String>> {
    let mut names = Vec::new();
    for (i, f) in traj.fields().iter().enumerate() {
        let name = format!("snapshot_{i:04}.json");
        FieldFile::new(f.clone(), Some(vel)).write(&dir.join(&name))?;
        names.push(name);
        names.push(format!("snapshot_{i:04}.bin"));
    }
    Ok(names)
}

/// `simulate`: direct time marching or Picard sweeps from the configured
/// initial datum.
pub fn simulate(config: &Path, out: Option<&Path>, seed: Option<u64>) -> Result<i32> {
    let mut cfg = RunConfig::load(config)?;
    if let Some(s) = seed {
        cfg.solver.seed = s;
    }
    let dir = out_dir(&cfg, out)?;
    let mut manifest = Manifest::new("simulate", &cfg.canonical(), cfg.solver.seed);
    let grid = cfg.grids.spatial()?;
    let tables = tables_for(&cfg)?;
    let vg = tables.velocity_grid();
    let f0 = initial_data(&grid, vg, &cfg.solver)?;
    let vel = (vg.half_width(), vg.points_per_axis());
    let result = match cfg.mode {
        RunMode::Direct => direct_solve(&f0, &tables, &cfg.solver).and_then(|sol| {
            fs::write(dir.join("diagnostics.csv"), sol.log.to_csv())?;
            let summary = DirectSummary {
                steps: sol.log.rows.len().saturating_sub(1),
                initial_energy: sol.initial_energy,
                functionals: sol.functionals,
                min_positivity_margin: sol.log.min_margin(),
                max_residuals: sol.log.max_residuals(),
            };
            write_json(&dir.join("summary.json"), &summary)?;
            manifest.artifacts.extend(["diagnostics.csv".to_string(), "summary.json".to_string()]);
            if cfg.output.snapshots {
                manifest.artifacts.extend(write_snapshots(&dir, &sol.trajectory, vel)?);
            }
            Ok(())
        }),
        RunMode::Picard => picard_iterate(&f0, &tables, &cfg.solver).and_then(|(report, state)| {
            fs::write(dir.join("picard.csv"), picard_csv(&report))?;
            write_json(&dir.join("summary.json"), &report)?;
            manifest.artifacts.extend(["picard.csv".to_string(), "summary.json".to_string()]);
            if cfg.output.snapshots {
                manifest.artifacts.extend(write_snapshots(&dir, &state.trajectory_curr, vel)?);
            }
            Ok(())
        }),
    };
    match result {
        Ok(()) => {
            manifest.write(&dir)?;
            Ok(0)
        }
        Err(Error::Diverged { n, t }) => {
            manifest.status = RunStatus::Diverged;
            manifest.last_good_step = n.checked_sub(1);
            manifest.write(&dir)?;
            Err(Error::Diverged { n, t })
        }
        Err(e) => Err(e),
    }
}

/// Flags of `verify` that override the config.
#[derive(Debug, Clone, Default)]
pub struct VerifyFlags {
    pub config: Option<PathBuf>,
    pub only: Option<Vec<String>>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub out: Option<PathBuf>,
}

/// `verify`: runs the inequality registry and writes the report bundle.
/// Status 0 iff every check passed.
pub fn verify(flags: &VerifyFlags) -> Result<i32> {
    let mut cfg = match &flags.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = flags.seed {
        cfg.verify.trials.seed = s;
    }
    if let Some(n) = flags.trials {
        cfg.verify.trials.n_trials = n;
    }
    cfg.validate()?;
    let dir = out_dir(&cfg, flags.out.as_deref())?;
    let suite = full_suite(&cfg.verify, flags.only.as_deref())?;
    suite.write(&dir)?;
    let mut manifest = Manifest::new("verify", &cfg.canonical(), cfg.verify.trials.seed);
    manifest.artifacts.push("verify_report.json".into());
    manifest.artifacts.extend(suite.reports.iter().map(|r| format!("{}.csv", r.id)));
    if !suite.passed {
        manifest.status = RunStatus::Failed;
    }
    manifest.write(&dir)?;
    for r in &suite.reports {
        eprintln!("{:16} {} C = {:.4e}", r.id, if r.passed { "pass" } else { "FAIL" }, r.fitted_c());
    }
    Ok(if suite.passed { 0 } else { 1 })
}

fn read_field(path: &Path) -> Result<FieldFile> {
    FieldFile::read(path).map_err(|e| match e {
        Error::Io(io) => Error::Format(format!("cannot read {}: {io}", path.display())),
        other => other,
    })
}

/// Velocity quadrature weight of a stored field (1 for scalar fields).
fn velocity_weight(file: &FieldFile) -> f64 {
    file.header.velocity.map_or(1.0, |(half_width, n)| (2.0 * half_width / n as f64).powi(3))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormReport {
    pub s: f64,
    pub p: f64,
    pub r: f64,
    pub homogeneous: bool,
    pub norm: f64,
}

/// `‖f‖_{B^s_{p,r}}` with the velocity rows combined in `L²_ξ`.
pub fn norm_of(file: &FieldFile, spec: &BesovSpec) -> Result<NormReport> {
    let sys = DyadicSystem::new(&file.field.grid, DEFAULT_SHARPNESS)?;
    let norm = besov_norm(&sys, &file.field, spec)? * velocity_weight(file).sqrt();
    Ok(NormReport { s: spec.s, p: spec.p, r: spec.r, homogeneous: spec.homogeneous, norm })
}

pub fn norms(field: &Path, spec: &BesovSpec) -> Result<i32> {
    let report = norm_of(&read_field(field)?, spec)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(0)
}

fn l2(f: &SpectralField, w: f64) -> f64 {
    (w * f.grid.volume() * f.values.iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt()
}

/// Rows `(q, ‖Δ_q f‖, 2^{qs}‖Δ_q f‖, ‖Σ_{j≤q} Δ_j f‖)`; the last column ends
/// at `‖f‖`.
pub fn decompose_rows(file: &FieldFile, s: f64) -> Result<Vec<(i32, f64, f64, f64)>> {
    let f = &file.field;
    let w = velocity_weight(file);
    let sys = DyadicSystem::new(&f.grid, DEFAULT_SHARPNESS)?;
    let mut partial = SpectralField::zeros(&f.grid, f.n_vel());
    let mut rows = Vec::new();
    for q in sys.blocks() {
        let b = sys.dyadic_block(q, f)?;
        partial = partial.add(&b)?;
        let n = l2(&b, w);
        rows.push((q, n, 2f64.powf(q as f64 * s) * n, l2(&partial, w)));
    }
    Ok(rows)
}

pub fn decompose_csv(rows: &[(i32, f64, f64, f64)]) -> String {
    let mut out = String::from("q,block_norm,weighted,partial_reconstruction\n");
    for (q, n, wn, p) in rows {
        out.push_str(&format!("{q},{n:.15e},{wn:.15e},{p:.15e}\n"));
    }
    out
}

pub fn decompose(field: &Path, s: f64, out: Option<&Path>) -> Result<i32> {
    let csv = decompose_csv(&decompose_rows(&read_field(field)?, s)?);
    match out {
        Some(p) => fs::write(p, csv)?,
        None => print!("{csv}"),
    }
    Ok(0)
}
