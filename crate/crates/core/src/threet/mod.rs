//! The 3T block system: definition, validation, assembly, dominance profile,
//! and file formats.

pub mod manifest;
pub mod mm;

use crate::error::Error;
use crate::linalg::chol::chol_factor;
use crate::linalg::dense::{dense_sym_eig, DenseSym};
use crate::linalg::sparse::SparseSym;
use crate::tol;
use crate::Result;

/// The block system
///
/// ```text
///     [ A_r   0    D_er^T ]
///     [ 0     A_i  D_ei^T ]
///     [ D_er  D_ei  A_e   ]
/// ```
///
/// with `D_er = diag(d_r)`, `D_ei = diag(d_i)`. The required properties are
///
/// 1. the assembled matrix is symmetric and strictly diagonally dominant,
/// 2. each `A_alpha` has positive diagonal and nonpositive off-diagonals,
/// 3. `d_r, d_i <= 0` entrywise (zero entries are accepted as the decoupled
///    degenerate case),
/// 4. `A_r`, `A_i` and the electron Schur complement are SPD.
///
/// [`validate`] reports on all four.
#[derive(Debug, Clone)]
pub struct ThreeTMatrix {
    /// Per-species dimension.
    pub n: usize,
    pub a_r: SparseSym,
    pub a_i: SparseSym,
    pub a_e: SparseSym,
    pub d_r: Vec<f64>,
    pub d_i: Vec<f64>,
}

impl ThreeTMatrix {
    pub fn new(
        a_r: SparseSym,
        a_i: SparseSym,
        a_e: SparseSym,
        d_r: Vec<f64>,
        d_i: Vec<f64>,
    ) -> Result<Self> {
        let n = a_r.n();
        if a_i.n() != n || a_e.n() != n || d_r.len() != n || d_i.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "block dimensions disagree: A_r {}, A_i {}, A_e {}, d_r {}, d_i {}",
                n,
                a_i.n(),
                a_e.n(),
                d_r.len(),
                d_i.len()
            )));
        }
        Ok(ThreeTMatrix {
            n,
            a_r,
            a_i,
            a_e,
            d_r,
            d_i,
        })
    }

    /// Total dimension 3n.
    pub fn dim(&self) -> usize {
        3 * self.n
    }

    /// The n=1 instance used throughout the tests: `A_r = A_i = [2]`,
    /// `A_e = [3]`, `d_r = d_i = (-1)`.
    pub fn reference_1x1() -> Self {
        ThreeTMatrix::new(
            SparseSym::from_diag(&[2.0]),
            SparseSym::from_diag(&[2.0]),
            SparseSym::from_diag(&[3.0]),
            vec![-1.0],
            vec![-1.0],
        )
        .unwrap()
    }

    /// Row sums `s_k` of the assembled matrix, computed blockwise.
    pub fn assembled_row_sums(&self) -> Vec<f64> {
        let mut s = Vec::with_capacity(self.dim());
        let sr = self.a_r.row_sums();
        let si = self.a_i.row_sums();
        let se = self.a_e.row_sums();
        for k in 0..self.n {
            s.push(sr[k] + self.d_r[k]);
        }
        for k in 0..self.n {
            s.push(si[k] + self.d_i[k]);
        }
        for k in 0..self.n {
            s.push(se[k] + self.d_r[k] + self.d_i[k]);
        }
        s
    }

    /// Diagonal ratios `(a_kk^r / a_kk^e, a_kk^i / a_kk^e)` per row.
    pub fn diag_ratios(&self) -> (Vec<f64>, Vec<f64>) {
        let de = self.a_e.diag_vec();
        let rr = self
            .a_r
            .diag_vec()
            .iter()
            .zip(&de)
            .map(|(a, e)| a / e)
            .collect();
        let ri = self
            .a_i
            .diag_vec()
            .iter()
            .zip(&de)
            .map(|(a, e)| a / e)
            .collect();
        (rr, ri)
    }
}

/// Outcome of one validated property.
#[derive(Debug, Clone, serde::Serialize)]
pub struct PropertyCheck {
    pub name: String,
    pub passed: bool,
    /// 1-based row of the first violation, if any.
    pub first_offending: Option<usize>,
    pub note: Option<String>,
}

impl PropertyCheck {
    fn pass(name: &str) -> Self {
        PropertyCheck {
            name: name.into(),
            passed: true,
            first_offending: None,
            note: None,
        }
    }

    fn fail(name: &str, row: Option<usize>, note: impl Into<String>) -> Self {
        PropertyCheck {
            name: name.into(),
            passed: false,
            first_offending: row,
            note: Some(note.into()),
        }
    }

    fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// Report of [`validate`]: one entry per property, pass/fail with the first
/// offending 1-based row index.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ValidationReport {
    pub checks: Vec<PropertyCheck>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&PropertyCheck> {
        self.checks.iter().find(|c| !c.passed)
    }
}

/// Check the four structural properties of a 3T system.
///
/// SPD of `A_r`/`A_i` is certified by sparse Cholesky; the Schur complement
/// is checked densely when `3n` fits the dense cap and otherwise recorded as
/// implied by strict diagonal dominance.
pub fn validate(m: &ThreeTMatrix) -> ValidationReport {
    let mut checks = Vec::new();

    checks.push(check_dominance(m));
    checks.push(check_sign_pattern(m));
    checks.push(check_coupling_signs(m));
    checks.extend(check_spd(m));

    ValidationReport { checks }
}

/// Property (1): strict diagonal dominance `a_kk > sum_{j != k} |a_kj|` of
/// the assembled matrix, row by row in block order. No tolerance slack:
/// equality fails.
fn check_dominance(m: &ThreeTMatrix) -> PropertyCheck {
    let name = "strict diagonal dominance of assembled A";
    let n = m.n;
    for k in 0..3 * n {
        let (diag, offsum) = assembled_row_dominance(m, k);
        if diag <= 0.0 || diag <= offsum {
            return PropertyCheck::fail(
                name,
                Some(k + 1),
                format!(
                    "row {}: diagonal {} vs off-diagonal sum {}",
                    k + 1,
                    diag,
                    offsum
                ),
            );
        }
    }
    PropertyCheck::pass(name)
}

/// Diagonal and off-diagonal absolute sum of assembled row `k` (0-based,
/// block order r, i, e).
fn assembled_row_dominance(m: &ThreeTMatrix, k: usize) -> (f64, f64) {
    let n = m.n;
    if k < n {
        let diag = m.a_r.diag(k);
        let mut off: f64 = m
            .a_r
            .row_entries(k)
            .filter(|&(c, _)| c != k)
            .map(|(_, v)| v.abs())
            .sum();
        off += m.d_r[k].abs();
        (diag, off)
    } else if k < 2 * n {
        let r = k - n;
        let diag = m.a_i.diag(r);
        let mut off: f64 = m
            .a_i
            .row_entries(r)
            .filter(|&(c, _)| c != r)
            .map(|(_, v)| v.abs())
            .sum();
        off += m.d_i[r].abs();
        (diag, off)
    } else {
        let r = k - 2 * n;
        let diag = m.a_e.diag(r);
        let mut off: f64 = m
            .a_e
            .row_entries(r)
            .filter(|&(c, _)| c != r)
            .map(|(_, v)| v.abs())
            .sum();
        off += m.d_r[r].abs() + m.d_i[r].abs();
        (diag, off)
    }
}

/// Property (2): M-matrix sign pattern of each `A_alpha`.
fn check_sign_pattern(m: &ThreeTMatrix) -> PropertyCheck {
    let name = "M-matrix sign pattern of A_r, A_i, A_e";
    for (label, a, row_offset) in [
        ("A_r", &m.a_r, 0usize),
        ("A_i", &m.a_i, m.n),
        ("A_e", &m.a_e, 2 * m.n),
    ] {
        for k in 0..m.n {
            for (c, v) in a.row_entries(k) {
                if c == k && v <= 0.0 {
                    return PropertyCheck::fail(
                        name,
                        Some(row_offset + k + 1),
                        format!(
                            "{label} diagonal entry {} at row {} is not positive",
                            v,
                            k + 1
                        ),
                    );
                }
                if c != k && v > 0.0 {
                    return PropertyCheck::fail(
                        name,
                        Some(row_offset + k + 1),
                        format!(
                            "{label} off-diagonal entry ({},{}) = {} is positive",
                            k + 1,
                            c + 1,
                            v
                        ),
                    );
                }
            }
        }
    }
    PropertyCheck::pass(name)
}

/// Property (3): coupling entries nonpositive. All-zero couplings pass with
/// a "decoupled" note.
fn check_coupling_signs(m: &ThreeTMatrix) -> PropertyCheck {
    let name = "nonpositive couplings d_r, d_i";
    for (label, d, row_offset) in [("d_r", &m.d_r, 0usize), ("d_i", &m.d_i, m.n)] {
        for (k, &v) in d.iter().enumerate() {
            if v > 0.0 {
                return PropertyCheck::fail(
                    name,
                    Some(row_offset + k + 1),
                    format!("{label}[{}] = {} is positive", k + 1, v),
                );
            }
        }
    }
    let check = PropertyCheck::pass(name);
    if m.d_r.iter().all(|&v| v == 0.0) && m.d_i.iter().all(|&v| v == 0.0) {
        check.with_note("decoupled: all coupling entries are zero")
    } else {
        check
    }
}

/// Property (4): `A_r`, `A_i` SPD (sparse Cholesky) and the electron Schur
/// complement SPD (dense eigenvalues when 3n fits the cap).
fn check_spd(m: &ThreeTMatrix) -> Vec<PropertyCheck> {
    let mut checks = Vec::new();
    let mut factors = Vec::new();
    for (label, a) in [("A_r", &m.a_r), ("A_i", &m.a_i)] {
        match chol_factor(a) {
            Ok(f) => {
                checks.push(PropertyCheck::pass(&format!("{label} SPD")));
                factors.push(Some(f));
            }
            Err(Error::NotSpd { index }) => {
                checks.push(PropertyCheck::fail(
                    &format!("{label} SPD"),
                    Some(index),
                    format!("Cholesky pivot {index} nonpositive"),
                ));
                factors.push(None);
            }
            Err(e) => {
                checks.push(PropertyCheck::fail(
                    &format!("{label} SPD"),
                    None,
                    e.to_string(),
                ));
                factors.push(None);
            }
        }
    }

    let name = "Schur complement SPD";
    if m.dim() > tol::DENSE_CAP {
        checks.push(
            PropertyCheck::pass(name)
                .with_note("assumed (implied by strict dominance, property 1)"),
        );
        return checks;
    }
    let (Some(fr), Some(fi)) = (&factors[0], &factors[1]) else {
        checks.push(PropertyCheck::fail(
            name,
            None,
            "not evaluated: a diffusion block is not SPD",
        ));
        return checks;
    };
    // S = A_e - D_er A_r^-1 D_er^T - D_ei A_i^-1 D_ei^T, column by column.
    let n = m.n;
    let mut s = m.a_e.to_dense();
    for (d, f) in [(&m.d_r, fr), (&m.d_i, fi)] {
        for j in 0..n {
            if d[j] == 0.0 {
                continue;
            }
            let mut col = vec![0.0; n];
            col[j] = d[j];
            let x = f.solve(&col).expect("factor dimension matches");
            for k in 0..n {
                s[(k, j)] -= d[k] * x[k];
            }
        }
    }
    match DenseSym::new(s) {
        Ok(ds) => {
            let eigs = dense_sym_eig(&ds);
            let min = eigs[0];
            if min > 0.0 {
                checks.push(PropertyCheck::pass(name));
            } else {
                checks.push(PropertyCheck::fail(
                    name,
                    None,
                    format!("smallest Schur eigenvalue {min} is not positive"),
                ));
            }
        }
        Err(e) => checks.push(PropertyCheck::fail(name, None, e.to_string())),
    }
    checks
}

/// Assemble the full `3n x 3n` matrix in block order (r rows first, then i,
/// then e).
pub fn assemble_full(m: &ThreeTMatrix) -> SparseSym {
    let n = m.n;
    let mut t = Vec::new();
    for k in 0..n {
        for (c, v) in m.a_r.row_entries(k) {
            t.push((k, c, v));
        }
        if m.d_r[k] != 0.0 {
            t.push((k, 2 * n + k, m.d_r[k]));
            t.push((2 * n + k, k, m.d_r[k]));
        }
    }
    for k in 0..n {
        for (c, v) in m.a_i.row_entries(k) {
            t.push((n + k, n + c, v));
        }
        if m.d_i[k] != 0.0 {
            t.push((n + k, 2 * n + k, m.d_i[k]));
            t.push((2 * n + k, n + k, m.d_i[k]));
        }
    }
    for k in 0..n {
        for (c, v) in m.a_e.row_entries(k) {
            t.push((2 * n + k, 2 * n + c, v));
        }
    }
    SparseSym::from_triplets(3 * n, &t).expect("assembled blocks are symmetric")
}

/// Split an assembled `3n x 3n` matrix back into blocks. The (r,i) coupling
/// block must be empty and the (r,e)/(i,e) blocks diagonal, as in the 3T
/// block layout.
pub fn split(full: &SparseSym, n: usize) -> Result<ThreeTMatrix> {
    if full.n() != 3 * n {
        return Err(Error::DimensionMismatch(format!(
            "split: matrix dimension {} vs 3n = {}",
            full.n(),
            3 * n
        )));
    }
    let mut tr = Vec::new();
    let mut ti = Vec::new();
    let mut te = Vec::new();
    let mut d_r = vec![0.0; n];
    let mut d_i = vec![0.0; n];
    for k in 0..n {
        for (c, v) in full.row_entries(k) {
            if c < n {
                tr.push((k, c, v));
            } else if c < 2 * n {
                if v != 0.0 {
                    return Err(Error::InvalidInstance(format!(
                        "nonzero r-i coupling at assembled entry ({},{})",
                        k + 1,
                        c + 1
                    )));
                }
            } else if c - 2 * n == k {
                d_r[k] = v;
            } else if v != 0.0 {
                return Err(Error::InvalidInstance(format!(
                    "off-diagonal r-e coupling at assembled entry ({},{})",
                    k + 1,
                    c + 1
                )));
            }
        }
        for (c, v) in full.row_entries(n + k) {
            if c >= n && c < 2 * n {
                ti.push((k, c - n, v));
            } else if c >= 2 * n {
                if c - 2 * n == k {
                    d_i[k] = v;
                } else if v != 0.0 {
                    return Err(Error::InvalidInstance(format!(
                        "off-diagonal i-e coupling at assembled entry ({},{})",
                        n + k + 1,
                        c + 1
                    )));
                }
            }
        }
        for (c, v) in full.row_entries(2 * n + k) {
            if c >= 2 * n {
                te.push((k, c - 2 * n, v));
            }
        }
    }
    ThreeTMatrix::new(
        SparseSym::from_triplets(n, &tr)?,
        SparseSym::from_triplets(n, &ti)?,
        SparseSym::from_triplets(n, &te)?,
        d_r,
        d_i,
    )
}

/// Per-row dominance and coupling strengths.
///
/// `theta_k^alpha = (sum_j a_kj^alpha) / a_kk^alpha` is the diagonally
/// dominant strength of row `k` of `A_alpha`; `delta_k^r = |d_k^r| / a_kk^r`
/// and `delta_k^{er} = |d_k^r| / a_kk^e` are the coupling strengths (same
/// for `i`). `s` carries the 3n assembled row sums.
#[derive(Debug, Clone, serde::Serialize)]
pub struct DominanceProfile {
    pub theta_r: Vec<f64>,
    pub theta_i: Vec<f64>,
    pub theta_e: Vec<f64>,
    pub delta_r: Vec<f64>,
    pub delta_i: Vec<f64>,
    pub delta_er: Vec<f64>,
    pub delta_ei: Vec<f64>,
    pub s: Vec<f64>,
}

/// Compute the dominance/coupling profile of a validated instance.
pub fn dominance_profile(m: &ThreeTMatrix) -> Result<DominanceProfile> {
    let n = m.n;
    let s = m.assembled_row_sums();
    let mut theta = Vec::new();
    for (label, a) in [("A_r", &m.a_r), ("A_i", &m.a_i), ("A_e", &m.a_e)] {
        let sums = a.row_sums();
        let mut t = Vec::with_capacity(n);
        for k in 0..n {
            let diag = a.diag(k);
            if diag <= 0.0 {
                return Err(Error::InvalidInstance(format!(
                    "{label} diagonal at row {} is {diag}, not positive",
                    k + 1
                )));
            }
            t.push(sums[k] / diag);
        }
        theta.push(t);
    }
    let theta_e = theta.pop().unwrap();
    let theta_i = theta.pop().unwrap();
    let theta_r = theta.pop().unwrap();
    let mut profile = DominanceProfile {
        theta_r,
        theta_i,
        theta_e,
        delta_r: Vec::with_capacity(n),
        delta_i: Vec::with_capacity(n),
        delta_er: Vec::with_capacity(n),
        delta_ei: Vec::with_capacity(n),
        s,
    };
    for k in 0..n {
        profile.delta_r.push(m.d_r[k].abs() / m.a_r.diag(k));
        profile.delta_i.push(m.d_i[k].abs() / m.a_i.diag(k));
        profile.delta_er.push(m.d_r[k].abs() / m.a_e.diag(k));
        profile.delta_ei.push(m.d_i[k].abs() / m.a_e.diag(k));
    }
    Ok(profile)
}
