//! Per-estimate reports and the suite bundle.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Slack granted to exact-constant checks for rounding.
pub const EXACT_SLACK: f64 = 1e-12;
/// Largest accepted change of a fitted constant under grid doubling.
pub const DRIFT_LIMIT: f64 = 2.0;

/// How the trial ratio `LHS / RHS` is judged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Direction {
    /// `LHS ≤ C·RHS`; the fitted constant is the largest ratio.
    Upper,
    /// `LHS ≥ c·RHS`; the fitted constant is the smallest ratio.
    Lower,
    /// `lo ≤ LHS / RHS ≤ hi` for every variant.
    Range { lo: f64, hi: f64 },
}

/// One trial: the reported pair and the ratio of every variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    /// Variant or sub-bound ratios, labelled by the report's `piece_labels`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pieces: Vec<f64>,
}

/// Statistics of all trials on one resolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSummary {
    pub x_points: usize,
    pub v_points: usize,
    pub trials: Vec<TrialRecord>,
    /// Trials with `LHS = RHS = 0`.
    pub skipped: usize,
    /// Trials with `RHS = 0 < LHS`, non-finite values, or (exact checks) a
    /// ratio beyond the constant.
    pub violations: usize,
    pub max_ratio: f64,
    pub min_ratio: f64,
    pub fitted_c: f64,
    /// Fitted constant of each piece.
    pub piece_fitted: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub id: String,
    pub anchor: String,
    pub direction: Direction,
    /// Constant asserted to be exactly 1 (or the exact range).
    pub exact: bool,
    pub piece_labels: Vec<String>,
    pub base: LevelSummary,
    pub refined: Option<LevelSummary>,
    /// `max(C₂/C₁, C₁/C₂)` between the doubled and the base resolution.
    pub refinement_drift: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub caveat: Option<String>,
    pub passed: bool,
}

impl InequalityReport {
    pub fn fitted_c(&self) -> f64 {
        self.base.fitted_c
    }

    pub fn max_ratio(&self) -> f64 {
        self.base.max_ratio
    }

    /// Per-trial rows of every resolution.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x_points,v_points,trial,lhs,rhs,ratio");
        for l in &self.piece_labels {
            let _ = write!(out, ",{l}");
        }
        out.push('\n');
        for lvl in std::iter::once(&self.base).chain(self.refined.as_ref()) {
            for t in &lvl.trials {
                let _ = write!(out, "{},{},{},{:.12e},{:.12e},{:.12e}", lvl.x_points, lvl.v_points, t.trial, t.lhs, t.rhs, t.ratio);
                for p in &t.pieces {
                    let _ = write!(out, ",{p:.12e}");
                }
                out.push('\n');
            }
        }
        out
    }
}

/// Output of a suite run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub version: String,
    pub seed: u64,
    pub n_trials: usize,
    pub reports: Vec<InequalityReport>,
    pub passed: bool,
}

impl SuiteReport {
    pub fn new(seed: u64, n_trials: usize, reports: Vec<InequalityReport>) -> Self {
        let passed = reports.iter().all(|r| r.passed);
        Self { version: crate::verify::REPORT_FORMAT_VERSION.into(), seed, n_trials, reports, passed }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Writes `verify_report.json` and one `<ID>.csv` per entry into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("verify_report.json"), self.to_json()?)?;
        for r in &self.reports {
            std::fs::write(dir.join(format!("{}.csv", r.id)), r.to_csv())?;
        }
        Ok(())
    }
}
