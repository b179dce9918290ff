//! Conjugate gradients with an optional SPD preconditioner.

use serde::Serialize;

use crate::error::Error;
use crate::linalg::sparse::{spmv, SparseSym};
use crate::linalg::vec::{axpy, dot, norm2};
use crate::Result;

/// Application of an SPD preconditioner `z = M^-1 r`.
pub trait Precond {
    fn apply(&self, r: &[f64]) -> Vec<f64>;
}

impl<F> Precond for F
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    fn apply(&self, r: &[f64]) -> Vec<f64> {
        self(r)
    }
}

/// Convergence record of an iterative solve.
///
/// `residuals` holds the relative 2-norm residual before each iteration and
/// after the last, so its length is `iters + 1`. When `b = 0` the residuals
/// are absolute (the relative scale is degenerate).
#[derive(Debug, Clone, Serialize)]
pub struct SolveStats {
    pub residuals: Vec<f64>,
    pub iters: usize,
    /// Geometric-mean contraction per iteration. Residual-based here;
    /// drivers that know the true solution report an A-norm based figure
    /// instead (see the convergence-factor measurement in `verify`).
    pub rho_observed: Option<f64>,
    pub converged: bool,
}

impl SolveStats {
    pub(crate) fn from_residuals(residuals: Vec<f64>, converged: bool) -> Self {
        let iters = residuals.len() - 1;
        let rho_observed = if iters > 0 && residuals[0] > 0.0 {
            let ratio = residuals[iters] / residuals[0];
            Some(ratio.powf(1.0 / iters as f64))
        } else {
            None
        };
        SolveStats {
            residuals,
            iters,
            rho_observed,
            converged,
        }
    }
}

/// Options for [`cg_solve`].
#[derive(Debug, Clone, Copy)]
pub struct CgOptions {
    /// Relative residual target.
    pub tol: f64,
    pub maxit: usize,
}

/// Preconditioned conjugate gradients on an SPD matrix.
///
/// Returns the iterate and per-iteration relative residuals. A nonpositive
/// curvature `p^T A p` or preconditioned product `z^T r` signals a non-SPD
/// matrix or preconditioner and is reported as a breakdown.
pub fn cg_solve(
    m: &SparseSym,
    b: &[f64],
    opts: CgOptions,
    precond: Option<&dyn Precond>,
) -> Result<(Vec<f64>, SolveStats)> {
    if opts.tol <= 0.0 {
        return Err(Error::InvalidConfig("cg: tol must be positive".into()));
    }
    let n = m.n();
    if b.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "cg: matrix dimension {} vs rhs length {}",
            n,
            b.len()
        )));
    }
    let bnorm = norm2(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        let stats = SolveStats::from_residuals(vec![0.0], true);
        return Ok((x, stats));
    }

    let mut r = b.to_vec();
    let mut residuals = vec![1.0];
    let mut z = match precond {
        Some(p) => p.apply(&r),
        None => r.clone(),
    };
    let mut p = z.clone();
    let mut rz = dot(&r, &z);

    for _ in 0..opts.maxit {
        let ap = spmv(m, &p)?;
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(Error::Breakdown(format!(
                "cg: nonpositive curvature p^T A p = {pap}"
            )));
        }
        let alpha = rz / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        let rel = norm2(&r) / bnorm;
        residuals.push(rel);
        if rel <= opts.tol {
            return Ok((x, SolveStats::from_residuals(residuals, true)));
        }
        z = match precond {
            Some(prec) => prec.apply(&r),
            None => r.clone(),
        };
        let rz_new = dot(&r, &z);
        if precond.is_some() && rz_new <= 0.0 {
            return Err(Error::Breakdown(format!(
                "cg: nonpositive preconditioned product z^T r = {rz_new}"
            )));
        }
        let beta = rz_new / rz;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
        rz = rz_new;
    }
    Ok((x, SolveStats::from_residuals(residuals, false)))
}
