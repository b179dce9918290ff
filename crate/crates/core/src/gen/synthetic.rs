//! Synthetic instances with exactly prescribed dominance and coupling
//! strengths.
//!
//! Each species block is a randomly edge-weighted 2D grid Laplacian plus a
//! per-row diagonal shift. With shift `sigma_k = theta * L_kk / (1 - theta)`
//! and block scale `rho_alpha * (1 - theta_alpha)` the diagonal becomes
//! `rho_alpha * L_kk` and every row of `A_alpha` attains the requested
//! `theta_alpha` exactly, boundary rows included. Couplings are set to
//! `d_k = -delta * a_kk`, which lands the requested coupling strengths
//! exactly as well.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::linalg::sparse::SparseSym;
use crate::threet::{validate, ThreeTMatrix};
use crate::Result;

/// Targets for the synthetic generator.
///
/// Feasibility requires `delta_r < theta_r`, `delta_i < theta_i`, and the
/// induced electron-row couplings `delta_er + delta_ei < theta_e` where
/// `delta_er = delta_r * ratio_r / ratio_e`. On a grid with more than one
/// cell the thetas must be strictly below 1 (a grid row cannot reach
/// `theta = 1` with its off-diagonals present); on a single cell they must
/// equal 1.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SyntheticConfig {
    /// Grid side; the per-species dimension is `n_grid * n_grid`.
    pub n_grid: usize,
    pub theta_r: f64,
    pub theta_i: f64,
    pub theta_e: f64,
    pub delta_r: f64,
    pub delta_i: f64,
    /// Diagonal scale ratios `a_kk^r : a_kk^i : a_kk^e`.
    pub ratio_r: f64,
    pub ratio_i: f64,
    pub ratio_e: f64,
    /// Seed for the random edge weights.
    pub seed: u64,
}

impl SyntheticConfig {
    /// Uniform targets with equal diagonals, the regime where the bound
    /// reduces to `max{1/(theta-delta), 4/(theta+2*delta)}`.
    pub fn uniform(n_grid: usize, theta: f64, delta: f64, seed: u64) -> Self {
        SyntheticConfig {
            n_grid,
            theta_r: theta,
            theta_i: theta,
            theta_e: theta,
            delta_r: delta,
            delta_i: delta,
            ratio_r: 1.0,
            ratio_i: 1.0,
            ratio_e: 1.0,
            seed,
        }
    }

    /// Induced electron-row coupling strengths `(delta_er, delta_ei)`.
    pub fn induced_e_couplings(&self) -> (f64, f64) {
        (
            self.delta_r * self.ratio_r / self.ratio_e,
            self.delta_i * self.ratio_i / self.ratio_e,
        )
    }

    fn check(&self) -> Result<()> {
        if self.n_grid == 0 {
            return Err(Error::InvalidConfig("n_grid must be positive".into()));
        }
        for (r, name) in [
            (self.ratio_r, "ratio_r"),
            (self.ratio_i, "ratio_i"),
            (self.ratio_e, "ratio_e"),
        ] {
            if !(r > 0.0) {
                return Err(Error::InvalidConfig(format!("{name} must be positive")));
            }
        }
        for (t, name) in [
            (self.theta_r, "theta_r"),
            (self.theta_i, "theta_i"),
            (self.theta_e, "theta_e"),
        ] {
            if !(t > 0.0 && t <= 1.0) {
                return Err(Error::InfeasibleTargets(format!(
                    "{name} = {t} outside (0, 1]"
                )));
            }
            if self.n_grid > 1 && t == 1.0 {
                return Err(Error::InfeasibleTargets(format!(
                    "{name} = 1 is unattainable on a grid with off-diagonal entries",
                )));
            }
            if self.n_grid == 1 && t != 1.0 {
                return Err(Error::InfeasibleTargets(format!(
                    "{name} = {t}: a single-cell block always has theta = 1",
                )));
            }
        }
        for (d, t, dn, tn) in [
            (self.delta_r, self.theta_r, "delta_r", "theta_r"),
            (self.delta_i, self.theta_i, "delta_i", "theta_i"),
        ] {
            if !(0.0..1.0).contains(&d) {
                return Err(Error::InfeasibleTargets(format!("{dn} = {d} outside [0, 1)")));
            }
            if d >= t {
                return Err(Error::InfeasibleTargets(format!(
                    "infeasible coupling target: {dn} = {d} must stay below {tn} = {t}"
                )));
            }
        }
        let (der, dei) = self.induced_e_couplings();
        if der + dei >= self.theta_e {
            return Err(Error::InfeasibleTargets(format!(
                "infeasible coupling target: induced delta_er + delta_ei = {} must stay below theta_e = {}",
                der + dei,
                self.theta_e
            )));
        }
        Ok(())
    }
}

/// Weighted grid-graph Laplacian: off-diagonal `-w` per face, diagonal the
/// sum of incident weights. Row sums are exactly zero.
fn grid_laplacian(n_grid: usize, rng: &mut ChaCha8Rng) -> (Vec<(usize, usize, f64)>, Vec<f64>) {
    let cell = |ix: usize, iy: usize| iy * n_grid + ix;
    let n = n_grid * n_grid;
    let mut off = Vec::new();
    let mut diag = vec![0.0; n];
    for iy in 0..n_grid {
        for ix in 0..n_grid {
            let k = cell(ix, iy);
            if ix + 1 < n_grid {
                let j = cell(ix + 1, iy);
                let w = rng.random_range(0.5..1.5);
                off.push((k, j, w));
                diag[k] += w;
                diag[j] += w;
            }
            if iy + 1 < n_grid {
                let j = cell(ix, iy + 1);
                let w = rng.random_range(0.5..1.5);
                off.push((k, j, w));
                diag[k] += w;
                diag[j] += w;
            }
        }
    }
    (off, diag)
}

/// Build an instance attaining the configured profile exactly.
pub fn gen_synthetic(cfg: &SyntheticConfig) -> Result<ThreeTMatrix> {
    cfg.check()?;
    let n = cfg.n_grid * cfg.n_grid;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (off, lap_diag) = grid_laplacian(cfg.n_grid, &mut rng);

    let block = |theta: f64, ratio: f64| -> SparseSym {
        let mut t = Vec::with_capacity(2 * off.len() + n);
        if cfg.n_grid == 1 {
            t.push((0, 0, ratio));
        } else {
            let scale = ratio * (1.0 - theta);
            for &(k, j, w) in &off {
                t.push((k, j, -scale * w));
                t.push((j, k, -scale * w));
            }
            for (k, &lkk) in lap_diag.iter().enumerate() {
                t.push((k, k, ratio * lkk));
            }
        }
        SparseSym::from_triplets(n, &t).expect("grid construction is symmetric")
    };

    let a_r = block(cfg.theta_r, cfg.ratio_r);
    let a_i = block(cfg.theta_i, cfg.ratio_i);
    let a_e = block(cfg.theta_e, cfg.ratio_e);
    let d_r: Vec<f64> = (0..n).map(|k| -cfg.delta_r * a_r.diag(k)).collect();
    let d_i: Vec<f64> = (0..n).map(|k| -cfg.delta_i * a_i.diag(k)).collect();

    let m = ThreeTMatrix::new(a_r, a_i, a_e, d_r, d_i)?;
    let report = validate(&m);
    if !report.passed() {
        let fail = report.first_failure().unwrap();
        return Err(Error::InfeasibleTargets(format!(
            "targets produced an invalid instance: {} ({})",
            fail.name,
            fail.note.as_deref().unwrap_or("")
        )));
    }
    Ok(m)
}

/// Draw a feasible random configuration: `theta in [0.3, 1)`, `delta in
/// [0, 0.9 theta)`, diagonal ratios in `[0.5, 2]`. Both coupling targets are
/// scaled down together if the induced electron-row constraint would bind.
pub fn random_config(n_grid: usize, seed: u64) -> SyntheticConfig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e3779b97f4a7c15));
    let mut draw_theta = |n_grid: usize| {
        if n_grid == 1 {
            1.0
        } else {
            rng.random_range(0.3..1.0)
        }
    };
    let theta_r = draw_theta(n_grid);
    let theta_i = draw_theta(n_grid);
    let theta_e = draw_theta(n_grid);
    let mut cfg = SyntheticConfig {
        n_grid,
        theta_r,
        theta_i,
        theta_e,
        delta_r: rng.random_range(0.0..0.9) * theta_r,
        delta_i: rng.random_range(0.0..0.9) * theta_i,
        ratio_r: rng.random_range(0.5..2.0),
        ratio_i: rng.random_range(0.5..2.0),
        ratio_e: rng.random_range(0.5..2.0),
        seed,
    };
    let (der, dei) = cfg.induced_e_couplings();
    let induced = der + dei;
    if induced >= 0.9 * cfg.theta_e {
        let shrink = 0.9 * cfg.theta_e / induced;
        cfg.delta_r *= shrink;
        cfg.delta_i *= shrink;
    }
    cfg
}
