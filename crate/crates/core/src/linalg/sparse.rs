//! Symmetric sparse matrices in CSR form.

use crate::error::Error;
use crate::tol;
use crate::Result;

/// A symmetric sparse matrix with the full pattern stored in CSR.
///
/// Construction asserts structural symmetry (entry (k,j) present iff (j,k)
/// present, values equal within [`tol::SYM_REL`] relative) and that every row
/// stores its diagonal entry explicitly.
#[derive(Debug, Clone)]
pub struct SparseSym {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseSym {
    /// Build from (row, col, value) triplets. Duplicate positions are summed;
    /// both halves of each off-diagonal pair must be supplied (use
    /// [`SparseSym::from_lower_triplets`] for lower-triangle input).
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(r, c, v) in triplets {
            if r >= n || c >= n {
                return Err(Error::DimensionMismatch(format!(
                    "triplet ({r},{c}) out of bounds for dimension {n}"
                )));
            }
            rows[r].push((c, v));
        }
        Self::from_rows(n, rows)
    }

    /// Build from triplets giving only the lower triangle (col <= row); the
    /// strict upper part is mirrored.
    pub fn from_lower_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut full = Vec::with_capacity(triplets.len() * 2);
        for &(r, c, v) in triplets {
            if c > r {
                return Err(Error::NotSymmetric(format!(
                    "entry ({},{}) lies above the diagonal in lower-triangle input",
                    r + 1,
                    c + 1
                )));
            }
            full.push((r, c, v));
            if c < r {
                full.push((c, r, v));
            }
        }
        Self::from_triplets(n, &full)
    }

    fn from_rows(n: usize, mut rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for (r, row) in rows.iter_mut().enumerate() {
            row.sort_by_key(|&(c, _)| c);
            let mut has_diag = false;
            let mut last: Option<usize> = None;
            for &(c, v) in row.iter() {
                if last == Some(c) {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(c);
                    values.push(v);
                    last = Some(c);
                }
                if c == r {
                    has_diag = true;
                }
            }
            if !has_diag {
                // Diagonal must be explicitly present in every row.
                let at = col_idx[row_ptr[r]..]
                    .iter()
                    .position(|&c| c > r)
                    .map(|p| row_ptr[r] + p)
                    .unwrap_or(col_idx.len());
                col_idx.insert(at, r);
                values.insert(at, 0.0);
            }
            row_ptr.push(col_idx.len());
        }
        let m = SparseSym {
            n,
            row_ptr,
            col_idx,
            values,
        };
        m.check_symmetry()?;
        Ok(m)
    }

    fn check_symmetry(&self) -> Result<()> {
        for r in 0..self.n {
            for (c, v) in self.row_entries(r) {
                let Some(vt) = self.get(c, r) else {
                    return Err(Error::NotSymmetric(format!(
                        "entry ({},{}) stored without its transpose",
                        r + 1,
                        c + 1
                    )));
                };
                let scale = v.abs().max(vt.abs());
                if (v - vt).abs() > tol::SYM_REL * scale {
                    return Err(Error::NotSymmetric(format!(
                        "entries ({},{}) and ({},{}) differ: {v} vs {vt}",
                        r + 1,
                        c + 1,
                        c + 1,
                        r + 1
                    )));
                }
            }
        }
        Ok(())
    }

    /// Identity matrix.
    pub fn identity(n: usize) -> Self {
        let triplets: Vec<_> = (0..n).map(|i| (i, i, 1.0)).collect();
        Self::from_triplets(n, &triplets).unwrap()
    }

    /// Diagonal matrix from entries.
    pub fn from_diag(d: &[f64]) -> Self {
        let triplets: Vec<_> = d.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
        Self::from_triplets(d.len(), &triplets).unwrap()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// (column, value) pairs of row `r`, ordered by column.
    pub fn row_entries(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let lo = self.row_ptr[r];
        let hi = self.row_ptr[r + 1];
        self.col_idx[lo..hi]
            .iter()
            .zip(&self.values[lo..hi])
            .map(|(&c, &v)| (c, v))
    }

    /// Stored value at (r, c), if present.
    pub fn get(&self, r: usize, c: usize) -> Option<f64> {
        let lo = self.row_ptr[r];
        let hi = self.row_ptr[r + 1];
        self.col_idx[lo..hi]
            .binary_search(&c)
            .ok()
            .map(|p| self.values[lo + p])
    }

    /// Diagonal entry of row `r` (always stored).
    pub fn diag(&self, r: usize) -> f64 {
        self.get(r, r).expect("diagonal entry stored in every row")
    }

    /// All diagonal entries.
    pub fn diag_vec(&self) -> Vec<f64> {
        (0..self.n).map(|r| self.diag(r)).collect()
    }

    /// Row sums.
    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n)
            .map(|r| self.row_entries(r).map(|(_, v)| v).sum())
            .collect()
    }

    /// Lower-triangle triplets (col <= row), row-major order.
    pub fn lower_triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for r in 0..self.n {
            for (c, v) in self.row_entries(r) {
                if c <= r {
                    out.push((r, c, v));
                }
            }
        }
        out
    }

    /// Dense copy, for verification below the dense cap.
    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.n, self.n);
        for r in 0..self.n {
            for (c, v) in self.row_entries(r) {
                m[(r, c)] = v;
            }
        }
        m
    }
}

/// Sparse matrix-vector product `m * x`.
pub fn spmv(m: &SparseSym, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != m.n {
        return Err(Error::DimensionMismatch(format!(
            "spmv: matrix dimension {} vs vector length {}",
            m.n,
            x.len()
        )));
    }
    let mut y = vec![0.0; m.n];
    for r in 0..m.n {
        let mut acc = 0.0;
        for (c, v) in m.row_entries(r) {
            acc += v * x[c];
        }
        y[r] = acc;
    }
    Ok(y)
}

/// Energy norm `sqrt(x^T m x)` of an SPD matrix.
pub fn a_norm(m: &SparseSym, x: &[f64]) -> Result<f64> {
    let mx = spmv(m, x)?;
    let q = super::vec::dot(x, &mx);
    if q < 0.0 {
        return Err(Error::Breakdown(format!(
            "quadratic form x^T A x = {q} is negative"
        )));
    }
    Ok(q.sqrt())
}
