//! Numerics for unitary k-design constructions built from overlapping Haar
//! twirls.
//!
//! The crate computes exact convergence rates (subspace angles) of
//! twirl-swap-twirl and twirl-crosstwirl protocols via generalized symmetric
//! eigenvalue problems on permutation Gram matrices, evaluates all the
//! closed-form angle/TPE bounds, converts 2→2-norm expander bounds into
//! relative-error design bounds through von Neumann index bounds, plans
//! recursive crosstwirl architectures on spatial lattices with depth and
//! communication budgets, and validates everything against a brute-force
//! quantum-channel oracle at desk scale.
//!
//! Module map:
//! - [`symgroup`]: symmetric-group combinatorics and Schur-Weyl dimensions.
//! - [`gram`]: permutation Gram matrices and their spectral utilities.
//! - [`angle`]: protocol matrices, exact subspace angles, analytic bounds.
//! - [`convert`]: index bounds and TPE → relative-error conversion.
//! - [`treeplan`]: recursive crosstwirl trees and lattice planning.
//! - [`oracle`]: exact twirl superoperators and ground-truth norms.
//! - [`report`], [`cli`]: JSON/CSV reporting and the command-line frontend.

pub mod angle;
pub mod cli;
pub mod convert;
pub mod gram;
pub mod logdomain;
pub mod oracle;
pub mod report;
pub mod symgroup;
pub mod treeplan;

mod threads;

pub use logdomain::LogReal;
pub use threads::init_threads;

/// Error taxonomy shared across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Input exceeds a hard size cap (factorial-indexed matrices etc.).
    #[error("capacity: {0}")]
    Capacity(String),
    /// Input violates a mathematical precondition of the operation.
    #[error("domain: {0}")]
    Domain(String),
    /// A numerical procedure failed to converge or produced garbage.
    #[error("numeric: {0}")]
    Numeric(String),
    /// An internal identity that must hold by theorem was violated;
    /// indicates an implementation bug rather than bad input.
    #[error("internal consistency: {0}")]
    Inconsistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;
