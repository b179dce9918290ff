//! Desk-scale numerical oracles for the theory behind the solver.
//!
//! Everything here assembles small dense matrices and checks, on concrete
//! instances, the facts the convergence bound rests on:
//!
//! * the smoothing property of the block Gauss-Seidel sweep, as positive
//!   semi-definiteness of `(M + M^T - A) - (1/4) M^T D^-1 M`,
//! * the weak approximation property, as positive semi-definiteness of the
//!   matrix `Q(beta)`,
//! * the exact two-grid identity `||E||_A = 1 - 1/K` and the norm-square
//!   relation `||E||_A = ||G2 T||_A^2`,
//! * the ordering `rho_obs <= ||E||_A <= kappa_exact <= kappa_simplified`.
//!
//! Operator A-norms are computed through the similarity
//! `||B||_A = ||L^T B L^-T||_2` with `A = L L^T` and the 2-norm from dense
//! singular values.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bounds::BoundReport;
use crate::error::Error;
use crate::linalg::dense::{eig_range, generalized_eig_max, spectral_norm};
use crate::linalg::sparse::a_norm;
use crate::solver::{pctl_cycle, Hierarchy};
use crate::threet::{assemble_full, ThreeTMatrix};
use crate::tol;
use crate::Result;

/// Result of the smoothing-property check.
#[derive(Debug, Clone, Serialize)]
pub struct SmoothingCheck {
    /// Smallest eigenvalue of `S = (M + M^T - A) - (1/4) M^T D^-1 M`.
    pub lambda_min: f64,
    pub passed: bool,
    /// Largest `alpha_1` keeping `S(alpha_1)` PSD, i.e. `1 / lambda_max(H)`.
    pub alpha1_max_estimate: f64,
    /// `lambda_max((M + M^T - A)^-1 M^T D^-1 M)`; the theory puts it at 4 or
    /// below.
    pub lambda_max_h: f64,
}

/// Result of the approximation-property check.
#[derive(Debug, Clone, Serialize)]
pub struct ApproxCheck {
    pub beta_used: f64,
    /// Smallest eigenvalue of `Q(beta_used)`.
    pub lambda_min: f64,
    pub passed: bool,
}

/// Dense evaluation of the two-grid identity.
#[derive(Debug, Clone, Serialize)]
pub struct TwoGridIdentityReport {
    /// `||E||_A` of the assembled cycle propagator `E = G2 T G1`.
    pub e_norm_direct: f64,
    /// The sharp two-grid constant `K`.
    pub k_constant: f64,
    /// `| ||E||_A - (1 - 1/K) |`.
    pub identity_residual: f64,
    /// `||G2 T||_A`; its square must reproduce `||E||_A`.
    pub g2t_norm: f64,
}

/// Dense assembled system matrix.
fn dense_a(m: &ThreeTMatrix) -> DMatrix<f64> {
    assemble_full(m).to_dense()
}

/// Dense smoother matrix `M`: block lower-triangular with `A_r`, `A_i` on
/// the diagonal and `D_er`, `D_ei`, `A_e` in the electron block row.
fn dense_m(m: &ThreeTMatrix) -> DMatrix<f64> {
    let n = m.n;
    let mut out = DMatrix::zeros(3 * n, 3 * n);
    for k in 0..n {
        for (c, v) in m.a_r.row_entries(k) {
            out[(k, c)] = v;
        }
        for (c, v) in m.a_i.row_entries(k) {
            out[(n + k, n + c)] = v;
        }
        for (c, v) in m.a_e.row_entries(k) {
            out[(2 * n + k, 2 * n + c)] = v;
        }
        out[(2 * n + k, k)] = m.d_r[k];
        out[(2 * n + k, n + k)] = m.d_i[k];
    }
    out
}

/// Dense interpolation `P = (P_r^T, P_i^T, I)^T`, `3n x n`.
fn dense_p(h: &Hierarchy) -> DMatrix<f64> {
    let n = h.matrix.n;
    let mut p = DMatrix::zeros(3 * n, n);
    for k in 0..n {
        p[(k, k)] = h.interp.w_r[k];
        p[(n + k, k)] = h.interp.w_i[k];
        p[(2 * n + k, k)] = 1.0;
    }
    p
}

fn check_cap(dim: usize) -> Result<()> {
    if dim > tol::DENSE_CAP {
        return Err(Error::DenseCapExceeded {
            n: dim,
            cap: tol::DENSE_CAP,
        });
    }
    Ok(())
}

/// Check the smoothing property with `alpha_1 = 1/4` and estimate the
/// largest admissible `alpha_1`.
pub fn check_smoothing(m: &ThreeTMatrix) -> Result<SmoothingCheck> {
    check_cap(m.dim())?;
    let a = dense_a(m);
    let mm = dense_m(m);
    let b = &mm + mm.transpose() - &a;
    let d_inv = DMatrix::from_diagonal(&a.map_diagonal(|v| 1.0 / v));
    let w = mm.transpose() * d_inv * &mm;
    let s = &b - &w * crate::bounds::ALPHA_1;
    let (lambda_min, lambda_max) = eig_range(&s);
    let scale = lambda_min.abs().max(lambda_max.abs());
    let passed = lambda_min >= -tol::PSD_SLACK * scale.max(1.0);
    let lambda_max_h = generalized_eig_max(&w, &b)?;
    Ok(SmoothingCheck {
        lambda_min,
        passed,
        alpha1_max_estimate: 1.0 / lambda_max_h,
        lambda_max_h,
    })
}

/// Assemble `Q(beta)` and test it for positive semi-definiteness.
pub fn check_approximation(
    m: &ThreeTMatrix,
    interp: &crate::solver::Interpolation,
    beta: f64,
) -> Result<ApproxCheck> {
    check_cap(m.dim())?;
    let n = m.n;
    let a = dense_a(m);
    let mut q = a * beta;
    for k in 0..n {
        let dr = m.a_r.diag(k);
        let di = m.a_i.diag(k);
        let wr = interp.w_r[k];
        let wi = interp.w_i[k];
        q[(k, k)] -= dr;
        q[(n + k, n + k)] -= di;
        q[(2 * n + k, 2 * n + k)] -= wr * wr * dr + wi * wi * di;
        // Off-diagonal blocks: -D_alpha P_alpha, both sides.
        q[(k, 2 * n + k)] += dr * wr;
        q[(2 * n + k, k)] += dr * wr;
        q[(n + k, 2 * n + k)] += di * wi;
        q[(2 * n + k, n + k)] += di * wi;
    }
    let (lambda_min, lambda_max) = eig_range(&q);
    let scale = lambda_min.abs().max(lambda_max.abs());
    let passed = lambda_min >= -tol::PSD_SLACK * scale.max(1.0);
    Ok(ApproxCheck {
        beta_used: beta,
        lambda_min,
        passed,
    })
}

/// Measure the per-cycle A-norm error contraction by iterating on `A e = 0`
/// from a random unit-A-norm error.
///
/// Returns the geometric mean of the ratios `||e_{k+1}||_A / ||e_k||_A` over
/// the last `cycles - 5` steps (the first five are transient). If the error
/// hits the measurement floor early the supremum of the observed ratios is
/// returned instead, which covers the direct-solver cases.
pub fn measure_convergence_factor(h: &Hierarchy, cycles: usize, seed: u64) -> Result<f64> {
    if cycles < 10 {
        return Err(Error::InvalidConfig(
            "measure_convergence_factor: need at least 10 cycles".into(),
        ));
    }
    let dim = h.matrix.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut e: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let nrm = a_norm(&h.full, &e)?;
    for v in e.iter_mut() {
        *v /= nrm;
    }

    let b = vec![0.0; dim];
    let mut prev = 1.0;
    let mut ratios = Vec::with_capacity(cycles);
    for _ in 0..cycles {
        pctl_cycle(h, &b, &mut e)?;
        let cur = a_norm(&h.full, &e)?;
        ratios.push(if prev > 0.0 { cur / prev } else { 0.0 });
        prev = cur;
        if cur < tol::MEASURE_FLOOR {
            let sup = ratios.iter().copied().fold(0.0, f64::max);
            return Ok(sup);
        }
    }
    let tail = &ratios[5.min(ratios.len() - 1)..];
    let log_mean = tail.iter().map(|r| r.ln()).sum::<f64>() / tail.len() as f64;
    Ok(log_mean.exp())
}

/// Dense evaluation of `||E||_A`, `||G2 T||_A`, and the constant `K` of the
/// two-grid identity.
pub fn exact_e_norm(h: &Hierarchy) -> Result<TwoGridIdentityReport> {
    let m = &h.matrix;
    check_cap(m.dim())?;
    let dim = m.dim();
    let a = dense_a(m);
    let mm = dense_m(m);
    let p = dense_p(h);
    let eye = DMatrix::<f64>::identity(dim, dim);

    let m_lu = mm.clone().lu();
    let mt_lu = mm.transpose().lu();
    let g2 = &eye - m_lu.solve(&a).expect("M is nonsingular");
    let g1 = &eye - mt_lu.solve(&a).expect("M^T is nonsingular");

    let a_c = p.transpose() * &a * &p;
    let ac_chol = a_c
        .cholesky()
        .ok_or_else(|| Error::Breakdown("dense Galerkin coarse operator is not SPD".into()))?;
    let t = &eye - &p * ac_chol.solve(&(p.transpose() * &a));

    let e = &g2 * &t * &g1;
    let g2t = &g2 * &t;

    let a_chol = a
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Breakdown("assembled matrix is not SPD".into()))?;
    let l = a_chol.l();
    // ||B||_A = ||L^T B L^-T||_2.
    let a_norm_of = |b: &DMatrix<f64>| -> f64 {
        let x = l.transpose() * b;
        // X L^-T = (L^-1 X^T)^T.
        let mut xt = x.transpose();
        l.solve_lower_triangular_mut(&mut xt);
        spectral_norm(&xt.transpose())
    };
    let e_norm_direct = a_norm_of(&e);
    let g2t_norm = a_norm_of(&g2t);

    // Symmetrized smoother of the cycle. The pre-smoother here is
    // I - M^-T A, so the identity's N^T (N + N^T - A)^-1 N is evaluated at
    // N = M^T, giving M~ = M (M + M^T - A)^-1 M^T.
    let b = &mm + mm.transpose() - &a;
    let b_chol = b
        .cholesky()
        .ok_or_else(|| Error::Breakdown("M + M^T - A is not SPD".into()))?;
    let m_tilde = &mm * b_chol.solve(&mm.transpose());
    let ptmp = p.transpose() * &m_tilde * &p;
    let ptmp_chol = ptmp
        .cholesky()
        .ok_or_else(|| Error::Breakdown("P^T M~ P is not SPD".into()))?;
    let pi = &p * ptmp_chol.solve(&(p.transpose() * &m_tilde));
    let one_minus_pi = &eye - &pi;
    let z = one_minus_pi.transpose() * &m_tilde * &one_minus_pi;
    let k_constant = generalized_eig_max(&z, &a)?;
    let identity_residual = (e_norm_direct - (1.0 - 1.0 / k_constant)).abs();

    Ok(TwoGridIdentityReport {
        e_norm_direct,
        k_constant,
        identity_residual,
        g2t_norm,
    })
}

/// The bound chain evaluated on one instance.
#[derive(Debug, Clone, Serialize)]
pub struct ChainReport {
    pub rho_obs: f64,
    /// Dense `||E||_A`, present when `3n` fits the dense cap.
    pub e_norm: Option<f64>,
    pub kappa_exact: f64,
    pub kappa_simplified: f64,
    pub ok: bool,
    pub violations: Vec<String>,
}

/// Assert `rho_obs <= ||E||_A <= kappa_exact <= kappa_simplified`, each leg
/// with [`tol::CHAIN_SLACK`]. The dense leg is skipped above the cap.
pub fn check_bound_ordering(h: &Hierarchy, report: &BoundReport, seed: u64) -> Result<ChainReport> {
    let rho_obs = measure_convergence_factor(h, 30, seed)?;
    let e_norm = if h.matrix.dim() <= tol::DENSE_CAP {
        Some(exact_e_norm(h)?.e_norm_direct)
    } else {
        None
    };
    let mut violations = Vec::new();
    let slack = tol::CHAIN_SLACK;
    match e_norm {
        Some(en) => {
            if rho_obs > en + slack {
                violations.push(format!("rho_obs {rho_obs} > ||E||_A {en}"));
            }
            if en > report.kappa_exact + slack {
                violations.push(format!("||E||_A {en} > kappa_exact {}", report.kappa_exact));
            }
        }
        None => {
            if rho_obs > report.kappa_exact + slack {
                violations.push(format!(
                    "rho_obs {rho_obs} > kappa_exact {}",
                    report.kappa_exact
                ));
            }
        }
    }
    if report.kappa_exact > report.kappa_simplified + slack {
        violations.push(format!(
            "kappa_exact {} > kappa_simplified {}",
            report.kappa_exact, report.kappa_simplified
        ));
    }
    Ok(ChainReport {
        rho_obs,
        e_norm,
        kappa_exact: report.kappa_exact,
        kappa_simplified: report.kappa_simplified,
        ok: violations.is_empty(),
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{beta_exact, bound_report};
    use crate::gen::{gen_fv, gen_synthetic, random_config, FvProblemConfig};
    use crate::solver::setup;
    use approx::assert_relative_eq;

    fn reference_hierarchy() -> Hierarchy {
        setup(ThreeTMatrix::reference_1x1()).unwrap()
    }

    #[test]
    fn smoothing_reference_matrix_entries() {
        // S for the reference instance is [[17/12, -1/12, 1/4],
        // [-1/12, 17/12, 1/4], [1/4, 1/4, 9/4]]: diagonally dominant, PSD.
        let m = ThreeTMatrix::reference_1x1();
        let a = dense_a(&m);
        let mm = dense_m(&m);
        let b = &mm + mm.transpose() - &a;
        let d_inv = DMatrix::from_diagonal(&a.map_diagonal(|v| 1.0 / v));
        let s = &b - &(mm.transpose() * d_inv * &mm) * 0.25;
        let expect = [
            [17.0 / 12.0, -1.0 / 12.0, 0.25],
            [-1.0 / 12.0, 17.0 / 12.0, 0.25],
            [0.25, 0.25, 2.25],
        ];
        for r in 0..3 {
            for c in 0..3 {
                assert_relative_eq!(s[(r, c)], expect[r][c], epsilon = 1e-14);
            }
        }
        let check = check_smoothing(&m).unwrap();
        assert!(check.passed);
        assert!(check.alpha1_max_estimate >= 0.25);
    }

    #[test]
    fn smoothing_decoupled_identity_blocks() {
        let m = ThreeTMatrix::new(
            crate::linalg::sparse::SparseSym::identity(1),
            crate::linalg::sparse::SparseSym::identity(1),
            crate::linalg::sparse::SparseSym::identity(1),
            vec![0.0],
            vec![0.0],
        )
        .unwrap();
        let check = check_smoothing(&m).unwrap();
        // M = I: S = I - I/4 = (3/4) I.
        assert_relative_eq!(check.lambda_min, 0.75, epsilon = 1e-12);
        assert!(check.passed);
        assert_relative_eq!(check.lambda_max_h, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn smoothing_random_sweep() {
        for seed in 0..50 {
            let m = gen_synthetic(&random_config(2, seed)).unwrap();
            let check = check_smoothing(&m).unwrap();
            assert!(check.passed, "seed {seed}: lambda_min {}", check.lambda_min);
            assert!(
                check.alpha1_max_estimate >= 0.25 - 1e-10,
                "seed {seed}: alpha1_max {}",
                check.alpha1_max_estimate
            );
            assert!(
                check.lambda_max_h <= 4.0 + tol::CHAIN_SLACK,
                "seed {seed}: lambda_max_h {}",
                check.lambda_max_h
            );
        }
    }

    #[test]
    fn approximation_reference_psd_at_beta_exact() {
        let h = reference_hierarchy();
        let s = h.matrix.assembled_row_sums();
        let (_, beta) = beta_exact(&h.matrix, &h.interp, &s).unwrap();
        let check = check_approximation(&h.matrix, &h.interp, beta).unwrap();
        assert!(check.passed, "lambda_min {}", check.lambda_min);
        assert!(check.lambda_min >= -1e-12);
    }

    #[test]
    fn approximation_fails_at_small_beta() {
        let h = reference_hierarchy();
        let check = check_approximation(&h.matrix, &h.interp, 0.1).unwrap();
        assert!(!check.passed);
        assert!(check.lambda_min < 0.0);
    }

    #[test]
    fn approximation_decoupled_passes_at_inverse_theta() {
        let m = ThreeTMatrix::new(
            crate::linalg::sparse::SparseSym::identity(2),
            crate::linalg::sparse::SparseSym::identity(2),
            crate::linalg::sparse::SparseSym::identity(2),
            vec![0.0; 2],
            vec![0.0; 2],
        )
        .unwrap();
        let h = setup(m).unwrap();
        // theta = 1 everywhere: beta = 1.
        let check = check_approximation(&h.matrix, &h.interp, 1.0).unwrap();
        assert!(check.passed);
    }

    #[test]
    fn rho_reference_is_tiny() {
        let h = reference_hierarchy();
        let rho = measure_convergence_factor(&h, 10, 3).unwrap();
        assert!(rho <= 1e-12, "rho {rho}");
    }

    #[test]
    fn rho_decoupled_is_tiny() {
        let m = ThreeTMatrix::new(
            crate::linalg::sparse::SparseSym::from_diag(&[2.0, 2.0]),
            crate::linalg::sparse::SparseSym::from_diag(&[2.0, 2.0]),
            crate::linalg::sparse::SparseSym::from_diag(&[3.0, 3.0]),
            vec![0.0; 2],
            vec![0.0; 2],
        )
        .unwrap();
        let h = setup(m).unwrap();
        let rho = measure_convergence_factor(&h, 10, 5).unwrap();
        assert!(rho <= 1e-12, "rho {rho}");
    }

    #[test]
    fn rho_below_kappa_on_fv() {
        let m = gen_fv(&FvProblemConfig::diffusive(16)).unwrap();
        let h = setup(m).unwrap();
        let rep = bound_report(&h).unwrap();
        let rho = measure_convergence_factor(&h, 30, 7).unwrap();
        assert!(
            rho <= rep.kappa_exact + tol::CHAIN_SLACK,
            "rho {rho} vs kappa {}",
            rep.kappa_exact
        );
    }

    #[test]
    fn identity_reference_direct_solver() {
        let h = reference_hierarchy();
        let rep = exact_e_norm(&h).unwrap();
        assert!(rep.e_norm_direct <= 1e-12, "||E||_A = {}", rep.e_norm_direct);
        assert_relative_eq!(rep.k_constant, 1.0, epsilon = 1e-10);
        assert!(rep.identity_residual <= 1e-10);
    }

    #[test]
    fn identity_on_random_instance() {
        let m = gen_synthetic(&random_config(2, 13)).unwrap();
        let h = setup(m).unwrap();
        let rep = exact_e_norm(&h).unwrap();
        assert!(
            rep.identity_residual <= tol::CHAIN_SLACK,
            "identity residual {}",
            rep.identity_residual
        );
        assert!(
            (rep.e_norm_direct - rep.g2t_norm * rep.g2t_norm).abs() <= tol::CHAIN_SLACK,
            "||E||_A {} vs ||G2T||_A^2 {}",
            rep.e_norm_direct,
            rep.g2t_norm * rep.g2t_norm
        );
    }

    #[test]
    fn chain_reference() {
        let h = reference_hierarchy();
        let rep = bound_report(&h).unwrap();
        let chain = check_bound_ordering(&h, &rep, 1).unwrap();
        assert!(chain.ok, "{:?}", chain.violations);
        assert!(chain.rho_obs <= 1e-12);
        assert_relative_eq!(chain.kappa_exact, 0.75, max_relative = 1e-14);
        assert_relative_eq!(chain.kappa_simplified, 0.875, max_relative = 1e-14);
    }

    #[test]
    fn chain_random_sweep() {
        for seed in 0..20 {
            let m = gen_synthetic(&random_config(2, 100 + seed)).unwrap();
            let h = setup(m).unwrap();
            let rep = bound_report(&h).unwrap();
            let chain = check_bound_ordering(&h, &rep, seed).unwrap();
            assert!(chain.ok, "seed {seed}: {:?}", chain.violations);
        }
    }

    #[test]
    fn cap_exceeded_reported() {
        let m = gen_fv(&FvProblemConfig::diffusive(16)).unwrap();
        // 3n = 768 > 256.
        assert!(matches!(
            check_smoothing(&m),
            Err(Error::DenseCapExceeded { .. })
        ));
        let h = setup(m).unwrap();
        assert!(matches!(
            exact_e_norm(&h),
            Err(Error::DenseCapExceeded { .. })
        ));
    }
}
