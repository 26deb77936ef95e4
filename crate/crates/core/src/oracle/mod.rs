//! Brute-force desk-scale ground truth.
//!
//! Twirls are applied matrix-free as orthogonal projections onto the span
//! of permutation operators: k!·k! partial inner products and one Gram
//! solve, never a materialized superoperator. Permutation operators act as
//! index shuffles. This pushes the feasible regime to 65536-dimensional
//! operator spaces while staying exact to rounding.
//!
//! Centralized tolerances: projector identity checks at 1e-10,
//! angle/oracle cross-validation at 1e-8, statistical checks at 3σ.

mod channel;
mod choi;
mod norm;
mod sample;
mod twirl;
pub mod verify;

pub use channel::{ProtocolChannel, SiteLayout};
pub use choi::{choi_matrix, choi_relative_error, RelativeErrorReport};
pub use norm::{norm_2to2_diff, PowerIterOptions};
pub use sample::{sample_haar_unitary, SampledChannel};
pub use twirl::{SwapOp, TwirlOp};

/// Tolerance for exact projector identities (idempotence, dominance).
pub const TOL_PROJECTOR: f64 = 1e-10;
/// Tolerance for cross-validation between oracle norms and pencil angles.
pub const TOL_CROSS_VALIDATION: f64 = 1e-8;
