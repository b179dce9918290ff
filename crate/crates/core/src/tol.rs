//! Tolerances used by validation, factorization checks, and the
//! verification oracles. Everything threshold-like lives here so test
//! expectations and runtime checks agree on one set of numbers.

/// Relative tolerance for structural symmetry of stored sparse matrices:
/// paired entries (k,j)/(j,k) must agree to this relative error.
pub const SYM_REL: f64 = 1e-14;

/// Relative residual a Cholesky solve must reach on well-conditioned
/// desk-scale instances: `||A x - b|| <= CHOL_RESIDUAL * ||b||`.
pub const CHOL_RESIDUAL: f64 = 1e-12;

/// Dense symmetric eigensolver reconstruction error, relative to the matrix
/// norm.
pub const EIG_RECON: f64 = 1e-10;

/// Relative agreement between `a_norm(m, x)^2` and the explicitly assembled
/// quadratic form `x^T (m x)`.
pub const ANORM_REL: f64 = 1e-13;

/// Interpolation constraint residual: `||A_alpha w_alpha + d_alpha||_2 <=
/// INTERP_RESIDUAL * ||d_alpha||_2`.
pub const INTERP_RESIDUAL: f64 = 1e-12;

/// Galerkin equality between the diagonally assembled coarse operator and
/// the dense triple product `P^T A P`, relative per entry.
pub const GALERKIN_REL: f64 = 1e-12;

/// Agreement between the two routes of the row-sum identity
/// `1 - w_alpha[k] = sum_j b_kj^alpha s_j`.
pub const IDENTITY_AGREE: f64 = 1e-10;

/// Positive semi-definiteness slack for the smoothing / approximation
/// property matrices: `lambda_min >= -PSD_SLACK * ||matrix||`.
pub const PSD_SLACK: f64 = 1e-10;

/// Slack on each leg of the bound chain
/// `rho_obs <= ||E||_A <= kappa_exact <= kappa_simplified`
/// and on the two-grid identity residual.
pub const CHAIN_SLACK: f64 = 1e-8;

/// Floor below which an error iterate is considered fully converged when
/// measuring contraction factors.
pub const MEASURE_FLOOR: f64 = 1e-13;

/// Default cap on the total dimension of dense verification kernels.
pub const DENSE_CAP: usize = 256;
