//! Numerical laboratory for random walks in random environments on `Z^d`.
//!
//! The crate is generic over the floating point scalar (see [`Real`]); the
//! aliases at the crate root fix it to `f64`, which is what the experiments
//! and the CLI use.

pub mod env_laws;
pub mod ergodic;
pub mod error;
pub mod lattice_env;
pub mod monge_ampere;
pub mod resolvent;
pub mod rng;
pub mod scalar;
pub mod sparse;
pub mod stats;
pub mod torus_spectral;
pub mod walk;

pub use error::{Error, Result};
pub use lattice_env::{Direction, DirectionPermutation, EnvironmentTransform, EnvironmentView};
pub use scalar::Real;

pub type Simplex = lattice_env::SimplexPoint<f64>;
pub type Environment = lattice_env::TorusEnvironment<f64>;
pub type Simplex32 = lattice_env::SimplexPoint<f32>;
pub type Environment32 = lattice_env::TorusEnvironment<f32>;
