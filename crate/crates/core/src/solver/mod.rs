//! Time integration of the perturbation equation
//! `∂_t f + ξ·∇_x f + L f = Γ(f, f)` and the Picard iteration, with per-step
//! energy and dissipation diagnostics.
//!
//! The linear symbol `i k·ξ + ν(ξ)` is diagonal per `(k, ξ)`, so every step is
//! an exponential-Euler update with the remaining terms frozen over the step.

mod config;
mod direct;
mod engine;
mod initial;
mod picard;
mod propagator;

pub use config::{InitialData, LossCoupling, SolverConfig};
pub use direct::{direct_solve, halving_gaps, richardson_slope, uniqueness_probe, DiagnosticsLog, Evolver, DiagnosticsRow, Solution};
pub use initial::initial_data;
pub use picard::{picard_iterate, picard_start, picard_sweep, IterationState, PicardReport};
pub use propagator::{linear_step, Propagator};
