//! Numerical laboratory for the cutoff hard-potential Boltzmann equation near
//! a global Maxwellian on the periodic torus.

pub mod collision;
pub mod error;
pub mod io;
pub mod lp;
pub mod macroscopic;
pub mod norms;
pub mod parallel;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};

/// Library version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
