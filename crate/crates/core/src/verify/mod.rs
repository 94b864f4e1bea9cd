//! Randomised checks of the estimates: sampled fields, per-trial left- and
//! right-hand sides, fitted constants and their stability under simultaneous
//! `(x, ξ)` grid doubling.
//!
//! A "≲" claim passes when its fitted constant is finite, no trial has
//! `RHS = 0 < LHS`, and the constant changes by less than 2× under
//! refinement. Exact claims must hold on every trial up to 1e-12.

mod checks;
mod level;
mod report;
mod sample;

pub use checks::{
    build_levels, full_suite, lookup, registry, run_check, run_level, RegistryEntry, TrajectoryRuns, VerifyConfig,
};
pub use level::{Level, LevelSpec, VerifyGrids, RICH_DEGREE};
pub use report::{Direction, InequalityReport, LevelSummary, SuiteReport, TrialRecord, DRIFT_LIMIT, EXACT_SLACK};
pub use sample::{field_l2, sample_coefficients, sample_field, sample_in_basis, trial_rng, FieldClass, TrialSpec};

/// Version tag of the JSON bundle.
pub const REPORT_FORMAT_VERSION: &str = "kinlab-verify/1";
