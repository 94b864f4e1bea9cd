//! Besov, Chemin-Lerner and classical mixed norms on trajectories, and the
//! energy/dissipation functionals built from them.

mod besov;
mod energy;
mod spec;

pub use besov::{
    besov_norm, besov_table, block_indices, block_row_norms, chemin_lerner_norm, classical_norm,
    DistributionTrajectory,
};
pub use energy::{
    block_powers, energy_functionals, BlockPowers, EnergyAccumulator, EnergyFunctionals, ENERGY_INDEX,
    MACRO_DISSIPATION_INDEX,
};
pub use spec::{lr_sum, trapezoid_weights, weighted_lp, BesovSpec, CLSpec};
