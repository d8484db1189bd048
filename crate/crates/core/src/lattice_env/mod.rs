//! Lattice, simplex points, periodic environments and their sitewise
//! functionals.

mod direction;
mod environment;
mod functionals;
mod simplex;
pub mod snapshot;
mod transform;

pub use direction::{Direction, DirectionPermutation};
pub use environment::{
    coords_of, index_of, materialize, permutation_action, reduce_coord, shift_view,
    EnvironmentView, PermutedView, ShiftView, TorusEnvironment, TransformedView,
};
pub use functionals::{
    drift, ellipticity_constant, ellipticity_field, is_balanced, lp_norm, site_drift,
    site_ellipticity, Exponent,
};
pub use simplex::SimplexPoint;
pub use transform::EnvironmentTransform;

/// `|x|_1`.
pub fn l1(x: &[i64]) -> i64 {
    x.iter().map(|c| c.abs()).sum()
}
