use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    /// The Lipschitz budget is below the data-dependent lower bound.
    #[error("Lipschitz constant {k} is below the required lower bound {k_lower}")]
    LipschitzTooSmall { k: f64, k_lower: f64 },

    #[error("instance of size {n} exceeds the limit {limit}: {hint}")]
    SizeLimit {
        n: usize,
        limit: usize,
        hint: &'static str,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A walk does not cover the cloud or repeats an index.
    #[error("invalid walk: {0}")]
    InvalidWalk(String),

    #[error("total masses differ: {left} vs {right}")]
    MassMismatch { left: f64, right: f64 },

    #[error("dual ascent did not converge after {iterations} iterations (residual {residual})")]
    NotConverged { iterations: usize, residual: f64 },

    /// A construction violated one of its own invariants.
    #[error("construction error: {0}")]
    Construction(String),
}
