//! Discrete concave functions on the `l1` ball: second differences, the
//! Monge-Ampère operator, a monotone solver for `|Mz|^{1/d} = f/c` with zero
//! boundary data, and the occupation-time functional it dominates.

mod grid;
mod occupation;
mod solver;

pub use grid::{
    cell_covering, gradient_cell, grid_csv, monge_ampere_op, second_difference, supporting_point,
    BallGrid, ConcaveGrid, GradientCell, L1Ball, SourceTerm,
};
pub use occupation::{occupation_functional, verify_occupation_bound, OccupationBoundReport};
pub use solver::{
    solve_monge_ampere, supersolution, MaProblem, MaSolution, Membership, SolverOptions,
    SweepOrder, DEFAULT_MAX_SWEEPS,
};
