use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("non-finite value {value} at index {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("negative operator entry {value} at ({x}, {y})")]
    Positivity { x: usize, y: usize, value: f64 },

    #[error("operator entry ({x}, {y}) is off the support: alpha[{y}] = {image}")]
    Support { x: usize, y: usize, image: usize },

    #[error("negative weight {value} at point {point}")]
    NegativeWeight { point: usize, value: f64 },

    #[error("weights sum to {sum}, expected 1")]
    Normalization { sum: f64 },

    #[error("invalid partition of unity: {0}")]
    Partition(String),

    #[error("{what} did not converge after {iterations} iterations (best estimate {best})")]
    Convergence {
        what: &'static str,
        iterations: usize,
        best: f64,
    },

    #[error("twisted operator is reducible or nilpotent, the subgradient is not unique")]
    ReducibleOperator,

    #[error("witness argument vanishes at point {0}")]
    DegenerateSupport(usize),

    #[error("measure is not invariant: {0}")]
    NotInvariant(String),

    #[error("measure is invariant, no divergence direction exists")]
    NoDirection,
}

pub type Result<T> = std::result::Result<T, Error>;
