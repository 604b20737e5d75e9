//! ADMM for `min ½‖A(Z) − f‖² over PSD ∩ affine-UTP`.
//!
//! The splitting keeps `Z` in the affine set and `W` in the PSD cone. On the
//! affine set `A(Z) = 1/d + B(Z − Id/d²)` where `B` acts by the projected
//! operators `B_i = (c_i c_i† − Id/d)/(d + 1)`. The `Z` step is a ridge
//! regression on the marginal-free subspace, solved through the `m×m` system
//! `(ρ + BB†) s = r − B(v)`.

use crate::error::{Error, Result};
use crate::linalg::HermitianMatrix;
use crate::measurement::MeasurementMap;

use super::projections::{project_marginal_free, project_psd};
use super::{RawSolution, SolverConfig, SolverStatus};

/// Dense Cholesky factor of `ρ I + G`.
struct Cholesky {
    m: usize,
    l: Vec<f64>,
}

impl Cholesky {
    fn new(g: &[f64], m: usize, rho: f64) -> Result<Self> {
        let mut l = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..=i {
                let mut s = g[i * m + j] + if i == j { rho } else { 0.0 };
                for k in 0..j {
                    s -= l[i * m + k] * l[j * m + k];
                }
                if i == j {
                    if s <= 0.0 {
                        return Err(Error::Degenerate(format!("ridge system is not positive definite at row {i}")));
                    }
                    l[i * m + i] = s.sqrt();
                } else {
                    l[i * m + j] = s / l[j * m + j];
                }
            }
        }
        Ok(Self { m, l })
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut y = b.to_vec();
        for i in 0..m {
            let mut s = y[i];
            for k in 0..i {
                s -= self.l[i * m + k] * y[k];
            }
            y[i] = s / self.l[i * m + i];
        }
        for i in (0..m).rev() {
            let mut s = y[i];
            for k in (i + 1)..m {
                s -= self.l[k * m + i] * y[k];
            }
            y[i] = s / self.l[i * m + i];
        }
        y
    }
}

const BALANCE_EVERY: usize = 10;
const BALANCE_RATIO: f64 = 10.0;

pub(super) fn solve(map: &MeasurementMap, f: &[f64], cfg: &SolverConfig) -> Result<RawSolution> {
    let d = map.dim();
    let dd = d * d;
    let m = map.len();
    let df = d as f64;
    let gp = map.projected_gram();
    let r: Vec<f64> = f.iter().map(|v| v - 1.0 / df).collect();
    let id = HermitianMatrix::identity(dd);
    let subspace_dim = ((dd - 1) * (dd - 1)) as f64;
    let mean_eigenvalue = m as f64 * (df - 1.0) / ((df + 1.0) * subspace_dim);
    let mut rho = cfg.penalty * mean_eigenvalue;
    let mut chol = Cholesky::new(&gp, m, rho)?;
    let mut w = id.scale(1.0 / (dd as f64));
    let mut u = HermitianMatrix::zeros(dd);
    let mut previous_objective = f64::INFINITY;
    let mut history = Vec::new();
    let mut status = SolverStatus::MaxIters;
    let mut iterations = 0;
    while iterations < cfg.max_iters {
        iterations += 1;
        let v = project_marginal_free(&(&w - &u), d)?;
        let bv = map.apply_traceless(&v)?;
        let rhs: Vec<f64> = r.iter().zip(&bv).map(|(a, b)| a - b).collect();
        let s = chol.solve(&rhs);
        let mut z = map.adjoint_rank_one_part(&s)?;
        z.add_scaled(1.0, &v);
        let shift = 1.0 / (dd as f64) - s.iter().sum::<f64>() / (df * (df + 1.0));
        z.add_scaled(shift, &id);

        // A(Z) − f = B(v) + G's − r
        let mut residual_sqr = 0.0;
        for i in 0..m {
            let gs: f64 = gp[i * m..(i + 1) * m].iter().zip(&s).map(|(a, b)| a * b).sum();
            let e = bv[i] + gs - r[i];
            residual_sqr += e * e;
        }
        let objective = 0.5 * residual_sqr;
        if cfg.record_history {
            history.push(objective);
        }

        let w_prev = w;
        let mut relaxed = z.scale(cfg.relaxation);
        relaxed.add_scaled(1.0 - cfg.relaxation, &w_prev);
        w = project_psd(&(&relaxed + &u))?;
        u.add_scaled(1.0, &(&relaxed - &w));
        let primal = (&z - &w).frobenius_norm();
        let dual = rho * (&w - &w_prev).frobenius_norm();
        let rel_change = (previous_objective - objective).abs() / previous_objective.max(objective).max(f64::MIN_POSITIVE);
        previous_objective = objective;
        if primal <= cfg.tol_feas && dual <= cfg.tol_feas && (rel_change <= cfg.tol_obj || objective <= cfg.tol_feas * cfg.tol_feas) {
            status = SolverStatus::Converged;
            break;
        }
        if cfg.adaptive_penalty && iterations % BALANCE_EVERY == 0 {
            let factor = if primal > BALANCE_RATIO * dual {
                2.0
            } else if dual > BALANCE_RATIO * primal {
                0.5
            } else {
                1.0
            };
            if factor != 1.0 {
                rho *= factor;
                u = u.scale(1.0 / factor);
                chol = Cholesky::new(&gp, m, rho)?;
            }
        }
    }
    Ok(RawSolution {
        matrix: w,
        iterations,
        status,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_solves_ridge_system() {
        let g = [4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0];
        let c = Cholesky::new(&g, 3, 0.5).unwrap();
        let x = c.solve(&[1.0, 2.0, 3.0]);
        for i in 0..3 {
            let lhs: f64 = (0..3).map(|j| (g[i * 3 + j] + if i == j { 0.5 } else { 0.0 }) * x[j]).sum();
            assert!((lhs - [1.0, 2.0, 3.0][i]).abs() < 1e-12);
        }
    }
}
