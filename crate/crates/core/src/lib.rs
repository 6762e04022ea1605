//! Conic programming duality toolkit.
//!
//! Programs are stored as `(A, b, c, K, C)` together with an orientation:
//! the primal `sup{<c,x> : b - Ax in K, x in C}` and its dual
//! `inf{<b,y> : A*y - c in C*, y in K*}`. Everything that decides a
//! property of a program returns a three-valued [`Verdict`] backed by a
//! re-validated witness.

pub mod cones;
pub mod diagnostics;
pub mod error;
pub mod gallery;
pub mod instance;
pub mod linalg;
pub mod program;
pub mod projection;
pub mod solver;

pub use cones::{Cone, FactorCone};
pub use error::{Error, Result};
pub use linalg::{EuclideanSpace, Factor, LinearMap, Subspace};
pub use program::{AffineSystem, ConicProgram, Sense, Side};
pub use solver::{solve, SolveResult, SolverSettings, Status, Verdict};
