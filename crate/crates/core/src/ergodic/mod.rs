//! Statistical and exact checks of the long-run behaviour of the walk:
//! velocity, martingale CLT, kernel identities under reflections and signed
//! permutations, and the comparison of local processes under the coupling.

mod coupling;
mod identities;
mod velocity;

pub use coupling::{
    coupling_distribution_test, exact_path_law, point_tags, CouplingReport, COUPLING_ALPHA,
    MAX_COUPLING_HORIZON, MIN_CELL_COUNT,
};
pub use identities::{
    kernel_identity_checks, permutation_identity_errors, pushed_density_residual,
    switch_reflection_error, IdentityReport, IDENTITY_TOL, PUSHED_DENSITY_TOL,
};
pub use velocity::{
    annealed_velocity, clt_check, coupled_drift_average, step_covariance, velocity_estimate,
    CltReport, CltStart, VelocityEstimate, ANNEALED_DENSITY_TOL,
};
