//! Dense symmetric kernels, used by the verification oracles at desk scale.

use nalgebra::{DMatrix, DVector};

use crate::error::Error;
use crate::tol;
use crate::Result;

/// A dense symmetric matrix with a dimension cap.
///
/// Everything dense in this crate is a verification oracle; the cap keeps
/// O(n^3) work at desk scale.
#[derive(Debug, Clone)]
pub struct DenseSym {
    mat: DMatrix<f64>,
}

impl DenseSym {
    /// Wrap a symmetric matrix, enforcing the default cap [`tol::DENSE_CAP`].
    pub fn new(mat: DMatrix<f64>) -> Result<Self> {
        Self::with_cap(mat, tol::DENSE_CAP)
    }

    /// Wrap a symmetric matrix with an explicit cap.
    pub fn with_cap(mat: DMatrix<f64>, cap: usize) -> Result<Self> {
        let n = mat.nrows();
        if mat.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "dense matrix is {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        if n > cap {
            return Err(Error::DenseCapExceeded { n, cap });
        }
        for r in 0..n {
            for c in 0..r {
                let a = mat[(r, c)];
                let b = mat[(c, r)];
                if (a - b).abs() > tol::SYM_REL * a.abs().max(b.abs()) {
                    return Err(Error::NotSymmetric(format!(
                        "dense entries ({},{}) and ({},{}) differ: {a} vs {b}",
                        r + 1,
                        c + 1,
                        c + 1,
                        r + 1
                    )));
                }
            }
        }
        Ok(DenseSym { mat })
    }

    pub fn n(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn dense_sym_eig(m: &DenseSym) -> Vec<f64> {
    let mut eigs: Vec<f64> = symmetric_eigenvalues(m.matrix());
    eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    eigs
}

/// Eigenvalues of an (assumed symmetric) `DMatrix`, unsorted. The matrix is
/// symmetrized first so accumulated rounding off the diagonal cannot feed the
/// solver a non-symmetric input.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let sym = (m + m.transpose()) * 0.5;
    sym.symmetric_eigenvalues().iter().copied().collect()
}

/// Smallest and largest eigenvalue of an (assumed symmetric) matrix.
pub fn eig_range(m: &DMatrix<f64>) -> (f64, f64) {
    let eigs = symmetric_eigenvalues(m);
    let min = eigs.iter().copied().fold(f64::INFINITY, f64::min);
    let max = eigs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (min, max)
}

/// Spectral (2-)norm via singular values.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    m.clone().singular_values().max()
}

/// Largest eigenvalue of the generalized symmetric problem `W v = lambda B v`
/// with `B` SPD, via the Cholesky reduction `L^-1 W L^-T`.
pub fn generalized_eig_max(w: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
    let chol = b
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Breakdown("generalized eig: B side is not SPD".into()))?;
    let l = chol.l();
    // X = L^-1 W L^-T by two triangular solves.
    let mut x = w.clone();
    l.solve_lower_triangular_mut(&mut x);
    let mut xt = x.transpose();
    l.solve_lower_triangular_mut(&mut xt);
    let (_, max) = eig_range(&xt);
    Ok(max)
}

/// Solve a dense SPD system.
pub fn spd_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let chol = a
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Breakdown("dense SPD solve: matrix is not SPD".into()))?;
    Ok(chol.solve(b))
}
