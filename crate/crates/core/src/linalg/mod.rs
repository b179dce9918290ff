//! Minimal sparse/dense linear-algebra kernels.
//!
//! The sparse side is CSR with the full symmetric pattern stored; factors are
//! envelope (profile) Cholesky, which is exact for any SPD matrix and has no
//! fill outside the profile, so the banded matrices produced by the grid
//! generators factor in place-like storage. The dense side wraps `nalgebra`
//! and is used only by verification oracles below the dense cap.

pub mod cg;
pub mod chol;
pub mod dense;
pub mod sparse;
pub mod vec;

pub use cg::{cg_solve, CgOptions, Precond, SolveStats};
pub use chol::{chol_factor, CholFactor};
pub use dense::{dense_sym_eig, DenseSym};
pub use sparse::{a_norm, spmv, SparseSym};
