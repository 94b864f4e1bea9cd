//! Littlewood-Paley machinery on the periodic torus: Fourier grids, the dyadic
//! partition `(χ, φ)`, block operators `Δ_q`, `S_q`, `Δ̇_q`, and the Bony
//! paraproduct decomposition.

mod dyadic;
mod grid;
mod paraproduct;

pub use dyadic::{chi_profile, phi_profile, DyadicSystem, INNER_RADIUS, OUTER_RADIUS, SHELL_RADIUS};
pub use grid::{FourierGrid, SpectralField, Transform};
pub use paraproduct::{paraproduct, remainder, Dealiaser};

/// Default transition sharpness of the cutoff profile.
pub const DEFAULT_SHARPNESS: f64 = 1.0;
