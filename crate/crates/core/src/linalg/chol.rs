//! Envelope (profile) Cholesky factorization.
//!
//! Cholesky fill is confined to the profile of the matrix: in row `k` the
//! factor is nonzero only from the first stored column of row `k` onward.
//! Storing each row's profile segment densely therefore gives an exact
//! factorization for any SPD matrix, and stays compact for the banded
//! matrices the grid generators produce.

use crate::error::Error;
use crate::linalg::sparse::SparseSym;
use crate::Result;

/// Lower-triangular factor `L` with `A = L L^T`.
#[derive(Debug, Clone)]
pub struct CholFactor {
    n: usize,
    /// First profile column of each row (`first[k] <= k`).
    first: Vec<usize>,
    /// Start of each row's segment in `values`; row `k` holds columns
    /// `first[k]..=k` contiguously.
    offsets: Vec<usize>,
    values: Vec<f64>,
    /// Row permutation applied before factorization. Identity here; the
    /// solve honors it so an ordering step can slot in without touching
    /// callers.
    perm: Vec<usize>,
}

/// Factor an SPD matrix. Fails with the 1-based pivot index on the first
/// nonpositive pivot.
pub fn chol_factor(m: &SparseSym) -> Result<CholFactor> {
    let n = m.n();
    let mut first = vec![0usize; n];
    for k in 0..n {
        first[k] = m
            .row_entries(k)
            .map(|(c, _)| c)
            .min()
            .unwrap_or(k)
            .min(k);
    }
    let mut offsets = Vec::with_capacity(n + 1);
    offsets.push(0);
    for k in 0..n {
        offsets.push(offsets[k] + (k - first[k] + 1));
    }
    let mut values = vec![0.0; offsets[n]];
    // Scatter the lower triangle of A into the profile storage.
    for k in 0..n {
        for (c, v) in m.row_entries(k) {
            if c <= k {
                values[offsets[k] + (c - first[k])] = v;
            }
        }
    }

    for k in 0..n {
        let fk = first[k];
        for j in fk..k {
            // l_kj = (a_kj - sum_m l_km l_jm) / l_jj over the overlap of the
            // two row profiles.
            let fj = first[j];
            let lo = fk.max(fj);
            let mut sum = values[offsets[k] + (j - fk)];
            for mcol in lo..j {
                sum -= values[offsets[k] + (mcol - fk)] * values[offsets[j] + (mcol - fj)];
            }
            let ljj = values[offsets[j] + (j - fj)];
            values[offsets[k] + (j - fk)] = sum / ljj;
        }
        let mut diag = values[offsets[k] + (k - fk)];
        for mcol in fk..k {
            let l = values[offsets[k] + (mcol - fk)];
            diag -= l * l;
        }
        if diag <= 0.0 {
            return Err(Error::NotSpd { index: k + 1 });
        }
        values[offsets[k] + (k - fk)] = diag.sqrt();
    }

    Ok(CholFactor {
        n,
        first,
        offsets,
        values,
        perm: (0..n).collect(),
    })
}

impl CholFactor {
    pub fn n(&self) -> usize {
        self.n
    }

    /// The row permutation in effect (identity).
    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    fn l(&self, r: usize, c: usize) -> f64 {
        if c < self.first[r] || c > r {
            0.0
        } else {
            self.values[self.offsets[r] + (c - self.first[r])]
        }
    }

    /// Solve `A x = b` via forward/backward substitution.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "solve: factor dimension {} vs rhs length {}",
                self.n,
                b.len()
            )));
        }
        // Forward: L y = P b.
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for k in 0..self.n {
            let fk = self.first[k];
            let mut sum = x[k];
            for c in fk..k {
                sum -= self.values[self.offsets[k] + (c - fk)] * x[c];
            }
            x[k] = sum / self.values[self.offsets[k] + (k - fk)];
        }
        // Backward: L^T z = y, column sweep over the profile.
        for k in (0..self.n).rev() {
            let fk = self.first[k];
            x[k] /= self.values[self.offsets[k] + (k - fk)];
            let xk = x[k];
            for c in fk..k {
                x[c] -= self.values[self.offsets[k] + (c - fk)] * xk;
            }
        }
        // Undo the permutation.
        let mut out = vec![0.0; self.n];
        for (i, &p) in self.perm.iter().enumerate() {
            out[p] = x[i];
        }
        Ok(out)
    }

    /// Dense reconstruction `L L^T`, for factor-quality tests.
    pub fn reconstruct(&self) -> nalgebra::DMatrix<f64> {
        let mut l = nalgebra::DMatrix::zeros(self.n, self.n);
        for r in 0..self.n {
            for c in self.first[r]..=r {
                l[(r, c)] = self.l(r, c);
            }
        }
        &l * l.transpose()
    }
}
