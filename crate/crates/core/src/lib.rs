//! Closest-point projection of real square matrices onto the special linear
//! group `SL(n)` in the Frobenius norm.
//!
//! The matrix problem reduces, through a singular value decomposition, to a
//! problem on the diagonal: find `p` with `prod(p) = 1` closest to the
//! singular values `a`. Four solvers are provided for that reduced problem,
//! together with the derivative of the projection map, random test-matrix
//! families and a benchmark harness.

pub mod bisection;
pub mod cli;
pub mod composite;
pub mod coords;
pub mod derivative;
pub mod error;
pub mod linalg;
pub mod newton;
pub mod projector;
pub mod solver;
pub mod spectrum;
pub mod testgen;

pub use error::{Error, Result};
