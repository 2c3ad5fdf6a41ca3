//! Transfer operators on finite dynamical systems.
//!
//! A finite system is a map `alpha` on the points `0..n`. Functions on the
//! points form the base algebra, `delta f = f ∘ alpha` is the composition
//! endomorphism, and a transfer operator is a nonnegative matrix whose entry
//! `(x, y)` may be positive only when `alpha[y] == x`.
//!
//! The crate computes the spectral potential (log spectral radius of the
//! twisted operator), t-entropy by the direct partition definition and by
//! the Legendre route, and runs the duality and large-deviation bounds that
//! connect them as executable checks.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod duality;
pub mod error;
pub mod est;
pub mod ext;
mod matrix;
pub mod scenario;
pub mod spectral;
pub mod system;
pub mod tentropy;
pub mod transfer;

pub use error::{Error, Result};
pub use ext::ExtReal;
pub use system::{FiniteSystem, Measure, PartitionOfUnity, Potential};
pub use transfer::TransferOperator;

/// Weights must sum to one within this tolerance.
pub const NORMALIZATION_TOL: f64 = 1e-12;
