//! Finite-dimensional general probabilistic theories (GPTs) in the iterated
//! CHSH game: instance construction, entanglement-swapping simulation,
//! teleportation-semigroup analysis and the character classification of
//! teleportation-stable theories.
//!
//! Conventions used throughout:
//!
//! * Duals are plain coordinate vectors; a functional acts by the dot product.
//! * The bipartite state is the map `rho: V_A -> V_C*`, a `dim_c x dim_a`
//!   matrix, so `rho(e, f) = f . (rho e)`.
//! * A bipartite measurement effect is a map `phi: V_C* -> V_A`, a
//!   `dim_a x dim_c` matrix. The product effect `f (x) e` is the matrix `e f^T`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chsh;
pub mod cli;
pub mod error;
pub mod families;
pub mod gpt;
pub mod io;
pub mod linalg;
pub mod pipeline;
pub mod repclass;
pub mod teleport;

pub use error::{Error, Result};
pub use gpt::GptInstance;
pub use linalg::{RealMatrix, RealVector};

/// Absolute tolerance for scalar comparisons.
pub const TOL_EQ: f64 = 1e-9;
/// Relative tolerance for numerical rank decisions.
pub const TOL_RANK: f64 = 1e-10;
/// Required margin for `a > 1/2`.
pub const TOL_MARGIN: f64 = 1e-6;
/// Default max-norm deduplication radius for semigroup elements.
pub const EPS_DEDUP: f64 = 1e-7;
/// Default cap on the number of closure elements.
pub const CLOSURE_CAP: usize = 4096;
/// Default word length for consistency checks.
pub const CONSISTENCY_DEPTH: usize = 4;
/// Tolerance for integrality of character multiplicities.
pub const TOL_CHAR: f64 = 1e-6;
