//! Command-line front end, file formats and experiment harness for the
//! optimal Lipschitz generators of `wopt-core`.

pub mod experiments;
pub mod formats;
pub mod output;

pub use wopt_core as core;
