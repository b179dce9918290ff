//! Computable convergence bounds for the PCTL cycle.
//!
//! The cycle's A-norm error contraction is bounded by `kappa = 1 - 1/(4 beta)`
//! where `beta` certifies the weak approximation property of the coarse
//! correction. Three betas are computed:
//!
//! * `beta_exact`: the per-row bounds `m_k`, using the quantities
//!   `sum_j b_kj^alpha d_j^alpha = -w_alpha[k]` already available from the
//!   interpolation vectors, so the whole bound costs two sparse solves.
//! * `beta_simplified`: a looser seven-term max per grid row that needs only
//!   diagonals, couplings, and row sums.
//! * `beta_parametric`: the same seven terms rewritten in the dominance
//!   strengths `theta` and coupling strengths `delta`; per-row profiles are
//!   accepted, and for uniform equal-diagonal instances it collapses to
//!   `max{1/(theta-delta), 4/(theta+2*delta)}`.
//!
//! The smoothing constant is fixed at `alpha_1 = 1/4`.

use serde::Serialize;

use crate::error::Error;
use crate::linalg::chol::CholFactor;
use crate::solver::{Hierarchy, Interpolation};
use crate::threet::{DominanceProfile, ThreeTMatrix};
use crate::tol;
use crate::Result;

/// The smoothing constant of the block Gauss-Seidel sweep.
pub const ALPHA_1: f64 = 0.25;

/// Everything the bound computation produces, serializable as JSON.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    /// Per-row weak-approximation bounds, all 3n rows.
    pub m: Vec<f64>,
    pub beta_exact: f64,
    pub beta_simplified: f64,
    pub beta_parametric: f64,
    /// Fixed smoothing constant 1/4.
    pub alpha1: f64,
    pub kappa_exact: f64,
    pub kappa_simplified: f64,
    pub kappa_parametric: f64,
    /// Per-row values `1 + sum_j b_kj^alpha d_j^alpha = 1 - w_alpha[k]`,
    /// radiation rows first then ion rows; each lies in (0, 1].
    pub identity_check: Vec<f64>,
}

/// Per-row `m_k` of the weak approximation property and their max.
///
/// Row ranges follow the assembled ordering: `1..n` bounds involve `A_r`
/// quantities, `n+1..2n` involve `A_i`, and the electron rows mix both. The
/// `sum_j b_kj d_j` terms come from the interpolation weights.
pub fn beta_exact(
    m: &ThreeTMatrix,
    interp: &Interpolation,
    s: &[f64],
) -> Result<(Vec<f64>, f64)> {
    let n = m.n;
    check_denominators(m, s)?;
    let mut mk = Vec::with_capacity(3 * n);
    for k in 0..n {
        let a = m.a_r.diag(k);
        let sigma = -interp.w_r[k];
        let t1 = a * (1.0 + sigma) / s[k];
        let t2 = a * (1.0 - sigma) / (s[k] - 2.0 * m.d_r[k]);
        mk.push(t1.max(t2));
    }
    for k in 0..n {
        let a = m.a_i.diag(k);
        let sigma = -interp.w_i[k];
        let t1 = a * (1.0 + sigma) / s[n + k];
        let t2 = a * (1.0 - sigma) / (s[n + k] - 2.0 * m.d_i[k]);
        mk.push(t1.max(t2));
    }
    for k in 0..n {
        let ar = m.a_r.diag(k);
        let ai = m.a_i.diag(k);
        let sr = -interp.w_r[k];
        let si = -interp.w_i[k];
        let sk = s[2 * n + k];
        let num_r_minus = ar * (sr * sr - sr);
        let num_r_plus = ar * (sr * sr + sr);
        let num_i_minus = ai * (si * si - si);
        let num_i_plus = ai * (si * si + si);
        let t1 = (num_r_minus + num_i_minus) / (sk - 2.0 * m.d_r[k] - 2.0 * m.d_i[k]);
        let t2 = (num_r_plus + num_i_minus) / (sk - 2.0 * m.d_i[k]);
        let t3 = (num_r_minus + num_i_plus) / (sk - 2.0 * m.d_r[k]);
        // The fourth electron-row inequality holds for any beta >= 0 because
        // sigma in (-1, 0] makes sigma^2 + sigma nonpositive; keep that as a
        // live check.
        let fourth = num_r_plus + num_i_plus;
        if fourth > 1e-12 * (ar + ai) {
            return Err(Error::InvalidInstance(format!(
                "electron row {}: sigma^2 + sigma numerator {fourth} is positive; \
                 interpolation weights left [0, 1)",
                k + 1
            )));
        }
        mk.push(t1.max(t2).max(t3));
    }
    let beta = mk.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((mk, beta))
}

/// The looser seven-term bound over grid rows `k = 1..n`:
///
/// ```text
/// max{ a_kk^r/s_k, 2a_kk^r/(s_k - 2d_k^r), a_kk^i/s_{k+n},
///      2a_kk^i/(s_{k+n} - 2d_k^i), 2a_kk^r/(s_{k+2n} - 2d_k^r),
///      2a_kk^i/(s_{k+2n} - 2d_k^i),
///      2(a_kk^r + a_kk^i)/(s_{k+2n} - 2d_k^r - 2d_k^i) }
/// ```
pub fn beta_simplified(m: &ThreeTMatrix, s: &[f64]) -> Result<f64> {
    let n = m.n;
    check_denominators(m, s)?;
    let mut beta = f64::NEG_INFINITY;
    for k in 0..n {
        let ar = m.a_r.diag(k);
        let ai = m.a_i.diag(k);
        let dr = m.d_r[k];
        let di = m.d_i[k];
        let se = s[2 * n + k];
        let terms = [
            ar / s[k],
            2.0 * ar / (s[k] - 2.0 * dr),
            ai / s[n + k],
            2.0 * ai / (s[n + k] - 2.0 * di),
            2.0 * ar / (se - 2.0 * dr),
            2.0 * ai / (se - 2.0 * di),
            2.0 * (ar + ai) / (se - 2.0 * dr - 2.0 * di),
        ];
        for t in terms {
            beta = beta.max(t);
        }
    }
    Ok(beta)
}

/// The simplified bound rewritten in dominance and coupling strengths.
/// `ratio_r`/`ratio_i` are the per-row diagonal ratios
/// `a_kk^r / a_kk^e` and `a_kk^i / a_kk^e`.
pub fn beta_parametric(
    profile: &DominanceProfile,
    ratio_r: &[f64],
    ratio_i: &[f64],
) -> Result<f64> {
    let n = profile.theta_r.len();
    if ratio_r.len() != n || ratio_i.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "beta_parametric: profile rows {n}, ratios {} / {}",
            ratio_r.len(),
            ratio_i.len()
        )));
    }
    let mut beta = f64::NEG_INFINITY;
    for k in 0..n {
        let (tr, ti, te) = (
            profile.theta_r[k],
            profile.theta_i[k],
            profile.theta_e[k],
        );
        let (dr, di) = (profile.delta_r[k], profile.delta_i[k]);
        let (der, dei) = (profile.delta_er[k], profile.delta_ei[k]);
        if tr - dr <= 0.0 || ti - di <= 0.0 || te - der - dei <= 0.0 {
            return Err(Error::InfeasibleTargets(format!(
                "row {}: coupling strength reaches the dominance strength",
                k + 1
            )));
        }
        let terms = [
            1.0 / (tr - dr),
            2.0 / (tr + dr),
            1.0 / (ti - di),
            2.0 / (ti + di),
            ratio_r[k] * 2.0 / (te + der - dei),
            ratio_i[k] * 2.0 / (te + dei - der),
            (ratio_r[k] + ratio_i[k]) * 2.0 / (te + der + dei),
        ];
        for t in terms {
            beta = beta.max(t);
        }
    }
    Ok(beta)
}

/// The convergence factor bound `kappa = 1 - 1/(4 beta)`.
pub fn kappa(beta: f64) -> Result<f64> {
    if beta <= 0.0 {
        return Err(Error::InvalidInstance(format!(
            "kappa: beta = {beta} must be positive"
        )));
    }
    Ok(1.0 - 1.0 / (4.0 * beta))
}

/// Which branch of the closed-form uniform bound is active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KappaBranch {
    /// `1 - (theta + 2 delta)/16` dominates (coupling below theta/2).
    Small,
    /// `1 - (theta - delta)/4` dominates (coupling above theta/2).
    Large,
    /// Both branches coincide (coupling exactly theta/2).
    Tie,
}

impl KappaBranch {
    pub fn as_str(&self) -> &'static str {
        match self {
            KappaBranch::Small => "small",
            KappaBranch::Large => "large",
            KappaBranch::Tie => "tie",
        }
    }
}

/// Closed-form bound for uniform profiles with equal diagonals:
/// `kappa = max{1 - (theta - delta)/4, 1 - (theta + 2 delta)/16}`,
/// with the branch switch at `delta = theta/2`.
pub fn example_kappa(theta: f64, delta: f64) -> Result<(f64, KappaBranch)> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::InfeasibleTargets(format!(
            "theta = {theta} outside (0, 1]"
        )));
    }
    if !(delta >= 0.0 && delta < theta) {
        return Err(Error::InfeasibleTargets(format!(
            "delta = {delta} outside [0, theta = {theta})"
        )));
    }
    let large = 1.0 - (theta - delta) / 4.0;
    let small = 1.0 - (theta + 2.0 * delta) / 16.0;
    let branch = if small > large {
        KappaBranch::Small
    } else if large > small {
        KappaBranch::Large
    } else {
        KappaBranch::Tie
    };
    Ok((large.max(small), branch))
}

/// Two routes to the row-sum identity
/// `1 + sum_j b_kj^alpha d_j^alpha = sum_j b_kj^alpha s_j > 0`:
/// the left side is `1 - w_alpha[k]`, the right side one extra solve
/// `A_alpha z = s_alpha-block`. Both must agree and lie in (0, 1].
#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    /// `1 - w_alpha[k]`, radiation rows then ion rows (2n values).
    pub values: Vec<f64>,
    /// The solve-route values `sum_j b_kj s_j`.
    pub cross: Vec<f64>,
    /// `max_k |values[k] - cross[k]|`.
    pub max_disagreement: f64,
    pub in_range: bool,
}

/// Evaluate the identity on both routes.
pub fn identity_check(
    m: &ThreeTMatrix,
    interp: &Interpolation,
    s: &[f64],
    factor_r: &CholFactor,
    factor_i: &CholFactor,
) -> Result<IdentityReport> {
    let n = m.n;
    let mut values = Vec::with_capacity(2 * n);
    for k in 0..n {
        values.push(1.0 - interp.w_r[k]);
    }
    for k in 0..n {
        values.push(1.0 - interp.w_i[k]);
    }
    let z_r = factor_r.solve(&s[..n])?;
    let z_i = factor_i.solve(&s[n..2 * n])?;
    let cross: Vec<f64> = z_r.into_iter().chain(z_i).collect();
    let max_disagreement = values
        .iter()
        .zip(&cross)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let in_range = values.iter().all(|&v| v > 0.0 && v <= 1.0);
    Ok(IdentityReport {
        values,
        cross,
        max_disagreement,
        in_range,
    })
}

/// Compute the full report for a hierarchy.
pub fn bound_report(h: &Hierarchy) -> Result<BoundReport> {
    let m = &h.matrix;
    let s = m.assembled_row_sums();
    let (mk, b_exact) = beta_exact(m, &h.interp, &s)?;
    let b_simpl = beta_simplified(m, &s)?;
    let profile = crate::threet::dominance_profile(m)?;
    let (ratio_r, ratio_i) = m.diag_ratios();
    let b_param = beta_parametric(&profile, &ratio_r, &ratio_i)?;
    let identity = identity_check(m, &h.interp, &s, &h.factor_r, &h.factor_i)?;
    if identity.max_disagreement > tol::IDENTITY_AGREE {
        return Err(Error::InvalidInstance(format!(
            "row-sum identity disagreement {:e} exceeds {:e}",
            identity.max_disagreement,
            tol::IDENTITY_AGREE
        )));
    }
    Ok(BoundReport {
        m: mk,
        beta_exact: b_exact,
        beta_simplified: b_simpl,
        beta_parametric: b_param,
        alpha1: ALPHA_1,
        kappa_exact: kappa(b_exact)?,
        kappa_simplified: kappa(b_simpl)?,
        kappa_parametric: kappa(b_param)?,
        identity_check: identity.values,
    })
}

fn check_denominators(m: &ThreeTMatrix, s: &[f64]) -> Result<()> {
    if s.len() != 3 * m.n {
        return Err(Error::DimensionMismatch(format!(
            "row sums length {} vs 3n = {}",
            s.len(),
            3 * m.n
        )));
    }
    // d <= 0, so s - 2d >= s: only s itself can go nonpositive, and strict
    // dominance of a positive-diagonal matrix forbids that.
    for (k, &v) in s.iter().enumerate() {
        if v <= 0.0 {
            return Err(Error::InvalidInstance(format!(
                "assembled row sum s_{} = {v} is not positive",
                k + 1
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::setup;
    use approx::assert_relative_eq;

    fn reference_hierarchy() -> Hierarchy {
        setup(ThreeTMatrix::reference_1x1()).unwrap()
    }

    #[test]
    fn beta_exact_reference() {
        let h = reference_hierarchy();
        let s = h.matrix.assembled_row_sums();
        let (mk, beta) = beta_exact(&h.matrix, &h.interp, &s).unwrap();
        // m = (1, 1, 0.6): rows 1-2 give max{2*0.5/1, 2*1.5/3} = 1, the
        // electron row max{0.6, 1/3, 1/3} = 0.6.
        assert_relative_eq!(mk[0], 1.0, max_relative = 1e-14);
        assert_relative_eq!(mk[1], 1.0, max_relative = 1e-14);
        assert_relative_eq!(mk[2], 0.6, max_relative = 1e-14);
        assert_relative_eq!(beta, 1.0, max_relative = 1e-14);
        assert_relative_eq!(kappa(beta).unwrap(), 0.75, max_relative = 1e-14);
    }

    #[test]
    fn beta_exact_decoupled_identity_blocks() {
        let m = ThreeTMatrix::new(
            crate::linalg::sparse::SparseSym::identity(1),
            crate::linalg::sparse::SparseSym::identity(1),
            crate::linalg::sparse::SparseSym::identity(1),
            vec![0.0],
            vec![0.0],
        )
        .unwrap();
        let h = setup(m).unwrap();
        let s = h.matrix.assembled_row_sums();
        let (mk, beta) = beta_exact(&h.matrix, &h.interp, &s).unwrap();
        assert_eq!(mk, vec![1.0, 1.0, 0.0]);
        assert_eq!(beta, 1.0);
    }

    #[test]
    fn beta_simplified_reference() {
        let h = reference_hierarchy();
        let s = h.matrix.assembled_row_sums();
        // Terms {2, 4/3, 2, 4/3, 4/3, 4/3, 8/5} -> 2.
        let beta = beta_simplified(&h.matrix, &s).unwrap();
        assert_relative_eq!(beta, 2.0, max_relative = 1e-14);
        assert_relative_eq!(kappa(beta).unwrap(), 0.875, max_relative = 1e-14);
    }

    #[test]
    fn beta_simplified_decoupled_identity() {
        let m = ThreeTMatrix::new(
            crate::linalg::sparse::SparseSym::identity(1),
            crate::linalg::sparse::SparseSym::identity(1),
            crate::linalg::sparse::SparseSym::identity(1),
            vec![0.0],
            vec![0.0],
        )
        .unwrap();
        let s = m.assembled_row_sums();
        // Terms {1, 2, 1, 2, 2, 2, 4} -> 4.
        assert_relative_eq!(beta_simplified(&m, &s).unwrap(), 4.0);
    }

    #[test]
    fn beta_parametric_reference_matches_simplified() {
        let h = reference_hierarchy();
        let profile = crate::threet::dominance_profile(&h.matrix).unwrap();
        let (rr, ri) = h.matrix.diag_ratios();
        let beta = beta_parametric(&profile, &rr, &ri).unwrap();
        assert_relative_eq!(beta, 2.0, max_relative = 1e-13);
        let s = h.matrix.assembled_row_sums();
        assert_relative_eq!(
            beta,
            beta_simplified(&h.matrix, &s).unwrap(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn beta_parametric_pole_as_delta_nears_theta() {
        let mut profile = DominanceProfile {
            theta_r: vec![0.5],
            theta_i: vec![0.5],
            theta_e: vec![0.5],
            delta_r: vec![0.499999],
            delta_i: vec![0.0],
            delta_er: vec![0.1],
            delta_ei: vec![0.0],
            s: vec![1.0; 3],
        };
        let big = beta_parametric(&profile, &[1.0], &[1.0]).unwrap();
        assert!(big > 1e5);
        assert!(kappa(big).unwrap() > 0.999999);
        profile.delta_r = vec![0.5];
        assert!(matches!(
            beta_parametric(&profile, &[1.0], &[1.0]),
            Err(Error::InfeasibleTargets(_))
        ));
    }

    #[test]
    fn kappa_values() {
        assert_relative_eq!(kappa(1.0).unwrap(), 0.75);
        assert_relative_eq!(kappa(4.0).unwrap(), 0.9375);
        assert_eq!(kappa(0.25).unwrap(), 0.0);
        assert!(kappa(0.0).is_err());
        assert!(kappa(-1.0).is_err());
    }

    #[test]
    fn example_kappa_values() {
        let (k, b) = example_kappa(1.0, 0.2).unwrap();
        assert_relative_eq!(k, 0.9125, epsilon = 1e-13);
        assert_eq!(b, KappaBranch::Small);

        let (k, b) = example_kappa(0.5, 0.1).unwrap();
        assert_relative_eq!(k, 0.95625, epsilon = 1e-13);
        assert_eq!(b, KappaBranch::Small);

        // delta = 0: the small branch 1 - theta/16 always dominates.
        for theta in [0.1, 0.5, 1.0] {
            let (k, b) = example_kappa(theta, 0.0).unwrap();
            assert_relative_eq!(k, 1.0 - theta / 16.0, epsilon = 1e-14);
            assert_eq!(b, KappaBranch::Small);
        }
    }

    #[test]
    fn example_kappa_branch_switch_at_half_theta() {
        for theta in [0.2, 0.5, 0.8, 1.0] {
            let delta = 0.5 * theta;
            let (_, b) = example_kappa(theta, delta).unwrap();
            assert_eq!(b, KappaBranch::Tie, "theta = {theta}");
            let (_, b) = example_kappa(theta, delta * 0.99).unwrap();
            assert_eq!(b, KappaBranch::Small);
            let (_, b) = example_kappa(theta, (delta * 1.01).min(theta * 0.999)).unwrap();
            assert_eq!(b, KappaBranch::Large);
        }
    }

    #[test]
    fn example_kappa_range_errors() {
        assert!(example_kappa(0.0, 0.0).is_err());
        assert!(example_kappa(1.1, 0.0).is_err());
        assert!(example_kappa(0.5, 0.5).is_err());
        assert!(example_kappa(0.5, -0.1).is_err());
    }

    #[test]
    fn identity_reference() {
        let h = reference_hierarchy();
        let s = h.matrix.assembled_row_sums();
        let rep = identity_check(&h.matrix, &h.interp, &s, &h.factor_r, &h.factor_i).unwrap();
        // 1 - 0.5 = 0.5 on both routes: sum b s = (1/2) * 1.
        assert_relative_eq!(rep.values[0], 0.5);
        assert_relative_eq!(rep.cross[0], 0.5);
        assert!(rep.max_disagreement <= 1e-14);
        assert!(rep.in_range);
    }

    #[test]
    fn identity_decoupled_is_one() {
        let m = ThreeTMatrix::new(
            crate::linalg::sparse::SparseSym::from_diag(&[2.0, 2.0]),
            crate::linalg::sparse::SparseSym::from_diag(&[2.0, 2.0]),
            crate::linalg::sparse::SparseSym::from_diag(&[3.0, 3.0]),
            vec![0.0; 2],
            vec![0.0; 2],
        )
        .unwrap();
        let h = setup(m).unwrap();
        let s = h.matrix.assembled_row_sums();
        let rep = identity_check(&h.matrix, &h.interp, &s, &h.factor_r, &h.factor_i).unwrap();
        for v in &rep.values {
            assert_relative_eq!(*v, 1.0);
        }
        assert!(rep.max_disagreement <= 1e-12);
    }

    #[test]
    fn report_reference_round_numbers() {
        let h = reference_hierarchy();
        let rep = bound_report(&h).unwrap();
        assert_relative_eq!(rep.beta_exact, 1.0, max_relative = 1e-14);
        assert_relative_eq!(rep.beta_simplified, 2.0, max_relative = 1e-14);
        assert_relative_eq!(rep.kappa_exact, 0.75, max_relative = 1e-14);
        assert_relative_eq!(rep.kappa_simplified, 0.875, max_relative = 1e-14);
        assert_eq!(rep.alpha1, 0.25);
        assert_eq!(rep.m.len(), 3);
        assert_eq!(rep.identity_check.len(), 2);
        // kappa < 1 always; kappa > 0 iff beta > 1/4.
        assert!(rep.kappa_exact < 1.0 && rep.kappa_exact > 0.0);
    }

    #[test]
    fn branch_switch_of_m1_matches_closed_form_locus() {
        // Sweep the coupling and compare the active branch of m_1 against
        // the predicted switch at |d| = (row sum of A_r) * w.
        let a = 2.0;
        for frac in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let d = -a * frac;
            let m = ThreeTMatrix::new(
                crate::linalg::sparse::SparseSym::from_diag(&[a]),
                crate::linalg::sparse::SparseSym::from_diag(&[a]),
                crate::linalg::sparse::SparseSym::from_diag(&[3.0]),
                vec![d],
                vec![d],
            )
            .unwrap();
            if !crate::threet::validate(&m).passed() {
                continue;
            }
            let h = setup(m).unwrap();
            let s = h.matrix.assembled_row_sums();
            let sigma = -h.interp.w_r[0];
            let t1 = a * (1.0 + sigma) / s[0];
            let t2 = a * (1.0 - sigma) / (s[0] - 2.0 * d);
            // Predicted: t1 active iff |d| >= rowsum(A_r) * w.
            let rowsum_ar = a + 0.0;
            let w = h.interp.w_r[0];
            if d.abs() > rowsum_ar * w + 1e-14 {
                assert!(t1 >= t2 - 1e-14, "frac {frac}: expected first branch");
            } else if d.abs() < rowsum_ar * w - 1e-14 {
                assert!(t2 >= t1 - 1e-14, "frac {frac}: expected second branch");
            }
        }
    }
}
