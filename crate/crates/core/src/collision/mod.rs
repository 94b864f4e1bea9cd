//! Velocity-space discretisation of the cutoff hard-potential collision
//! operators: collision frequency `ν`, the compact part `K = K₂ - K₁`, the
//! linearised operator `L = ν - K` and the bilinear term `Γ`.
//!
//! Off-grid post-collision values are interpolated from `f/μ^{1/2}`, which
//! turns the energy identity `μ(ξ)μ(ξ_*) = μ(ξ')μ(ξ'_*)` into exact
//! Maxwellian factors and keeps the collision invariants representable.

mod basis;
mod field;
mod gamma;
mod persist;
mod quadrature;
mod stencil;
mod tables;

pub use basis::{monomial_exponents, InvariantBasis, PolynomialBasis};
pub use field::{apply_diagonal, apply_field, apply_matrix, gamma_columns, gamma_field, remove_invariant_columns, FieldOp};
pub use gamma::{gamma_bilinear, gamma_gain, gamma_loss, gamma_raw, gamma_symmetric, GalerkinTensor};
pub use persist::{load_tables, save_tables, TABLE_FORMAT_VERSION};
pub use quadrature::{gauss_legendre, maxwellian, sqrt_maxwellian, AngularKernel, KernelParams, SphereQuadrature, VelocityGrid};
pub use stencil::{Interpolation, Stencil, StencilTable};
pub use tables::{apply_l, build_tables, build_tables_with, CollisionTables, TableDiagnostics, TableOptions};
