//! Optimal Lipschitz generators for 1-Wasserstein fitting of an empirical
//! measure with a univariate uniform latent variable.
//!
//! Given a sample `X_1..X_n` and a Lipschitz budget `K`, the crate builds the
//! piecewise-linear generator `G: [0,1] -> R^d` whose pushforward of the
//! uniform law is closest to the empirical measure in `W_1`, together with its
//! closed-form distance:
//!
//! | module | content |
//! |--------|---------|
//! | [`model`] | samples, piecewise-linear generators, discrete measures |
//! | [`univariate`] | exact optimum for `d = 1` and the fixed-`K` grid optimum |
//! | [`path`] | shortest covering walk under squared step lengths |
//! | [`multivariate`] | optimum in `R^d` built from a covering walk |
//! | [`semidiscrete`] | additively weighted Voronoi cells and adapted weights |
//! | [`oracle`] | exact discrete `W_1` used to cross-check the closed forms |
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod error;
pub mod geom;
pub mod model;
pub mod multivariate;
pub mod oracle;
pub mod path;
pub mod semidiscrete;
pub mod univariate;

pub use error::{Error, Result};
pub use model::{DiscreteMeasure, LipschitzReport, PiecewiseLinearGenerator, SampleCloud};
pub use multivariate::MultivariateOptimum;
pub use path::{ClosureMatrix, WalkSolution};
pub use semidiscrete::{CellAssignment, WeightedVoronoi};
pub use univariate::UnivariateOptimum;

/// Absolute tolerance for comparisons of latent coordinates.
pub const LATENT_TOL: f64 = 1e-12;

/// Absolute tolerance for geometric membership tests.
pub const GEOM_TOL: f64 = 1e-9;
