//! Two-level solver for 3T (radiation / ion / electron) block linear systems.
//!
//! The systems handled here have the block form
//!
//! ```text
//!     [ A_r   0    D_er^T ] [x_r]   [b_r]
//!     [ 0     A_i  D_ei^T ] [x_i] = [b_i]
//!     [ D_er  D_ei  A_e   ] [x_e]   [b_e]
//! ```
//!
//! where each `A_alpha` is a sparse SPD M-matrix (a discretized diffusion
//! operator) and `D_er`, `D_ei` are diagonal with nonpositive entries (energy
//! exchange between species). The PCTL method coarsens by physical variable:
//! the electron unknowns form the coarse grid, the radiation and ion unknowns
//! are fine points, interpolation is diagonal, and smoothing is block
//! Gauss-Seidel over the species blocks.
//!
//! Crate layout:
//!
//! * [`linalg`] — sparse CSR kernels, envelope Cholesky, CG, dense oracles.
//! * [`threet`] — the block system type, validation, assembly, file formats.
//! * [`gen`] — finite-volume and synthetic problem generators.
//! * [`solver`] — the two-level cycle, stationary driver, preconditioned CG.
//! * [`bounds`] — computable convergence bounds (exact, simplified,
//!   parametric) and the factor `kappa = 1 - 1/(4 beta)`.
//! * [`verify`] — desk-scale dense oracles for the smoothing property, the
//!   weak approximation property, the two-grid identity, and measured
//!   convergence factors.

pub mod bounds;
pub mod error;
pub mod gen;
pub mod linalg;
pub mod solver;
pub mod threet;
pub mod tol;
pub mod verify;

pub use error::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
