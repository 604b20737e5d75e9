//! Monotone accelerated projected gradient with Dykstra projections.

use crate::error::Result;
use crate::linalg::HermitianMatrix;
use crate::measurement::MeasurementMap;

use super::projections::dykstra_projection;
use super::{DataFit, RawSolution, SolverConfig, SolverStatus, StepRule};

const MAX_BACKTRACKS: usize = 60;

fn loss(fit: DataFit, residual: &[f64]) -> f64 {
    match fit {
        DataFit::LeastSquares => 0.5 * residual.iter().map(|e| e * e).sum::<f64>(),
        DataFit::Huber { delta } => residual
            .iter()
            .map(|e| {
                let a = e.abs();
                if a <= delta {
                    0.5 * e * e / delta
                } else {
                    a - 0.5 * delta
                }
            })
            .sum(),
    }
}

fn loss_derivative(fit: DataFit, residual: &[f64]) -> Vec<f64> {
    match fit {
        DataFit::LeastSquares => residual.to_vec(),
        DataFit::Huber { delta } => residual.iter().map(|e| (e / delta).clamp(-1.0, 1.0)).collect(),
    }
}

fn residual(map: &MeasurementMap, z: &HermitianMatrix, f: &[f64]) -> Result<Vec<f64>> {
    Ok(map.apply(z)?.iter().zip(f).map(|(a, b)| a - b).collect())
}

pub(super) fn solve(map: &MeasurementMap, f: &[f64], cfg: &SolverConfig) -> Result<RawSolution> {
    let d = map.dim();
    let dd = d * d;
    let curvature = match cfg.data_fit {
        DataFit::LeastSquares => 1.0,
        DataFit::Huber { delta } => 1.0 / delta,
    };
    let lipschitz = map.operator_norm().powi(2) * curvature;
    let mut step_l = match cfg.step_rule {
        StepRule::FixedInverseLipschitz => lipschitz,
        StepRule::Backtracking => lipschitz / 64.0,
    };
    let project = |h: &HermitianMatrix| dykstra_projection(h, d, cfg.dykstra_iters, cfg.tol_feas).map(|o| o.matrix);

    let mut x = HermitianMatrix::identity(dd).scale(1.0 / dd as f64);
    let mut fx = loss(cfg.data_fit, &residual(map, &x, f)?);
    let mut y = x.clone();
    let mut t = 1.0f64;
    let mut history = Vec::new();
    let mut status = SolverStatus::MaxIters;
    let mut iterations = 0;
    while iterations < cfg.max_iters {
        iterations += 1;
        if cfg.step_rule == StepRule::Backtracking {
            step_l *= 0.8;
        }
        let ry = residual(map, &y, f)?;
        let fy = loss(cfg.data_fit, &ry);
        let grad = map.adjoint(&loss_derivative(cfg.data_fit, &ry))?;
        let mut candidate;
        let mut backtracks = 0;
        loop {
            let mut moved = y.clone();
            moved.add_scaled(-1.0 / step_l, &grad);
            candidate = project(&moved)?;
            if cfg.step_rule == StepRule::FixedInverseLipschitz || backtracks >= MAX_BACKTRACKS {
                break;
            }
            let delta = &candidate - &y;
            let model = fy + grad.inner(&delta) + 0.5 * step_l * delta.frobenius_norm().powi(2);
            let fc = loss(cfg.data_fit, &residual(map, &candidate, f)?);
            if fc <= model + 1e-15 * fy.abs().max(1.0) {
                break;
            }
            step_l = (2.0 * step_l).min(lipschitz);
            backtracks += 1;
            if step_l >= lipschitz {
                let mut moved = y.clone();
                moved.add_scaled(-1.0 / step_l, &grad);
                candidate = project(&moved)?;
                break;
            }
        }
        let fc = loss(cfg.data_fit, &residual(map, &candidate, f)?);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let (x_next, f_next) = if fc <= fx { (candidate.clone(), fc) } else { (x.clone(), fx) };
        // y = x⁺ + (t/t⁺)(p − x⁺) + ((t − 1)/t⁺)(x⁺ − x)
        let mut y_next = x_next.clone();
        y_next.add_scaled(t / t_next, &(&candidate - &x_next));
        y_next.add_scaled((t - 1.0) / t_next, &(&x_next - &x));
        let rel_change = (fx - f_next).abs() / fx.max(f64::MIN_POSITIVE);
        x = x_next;
        let stalled = f_next == fx && fc > fx;
        fx = f_next;
        y = y_next;
        t = t_next;
        if cfg.record_history {
            history.push(fx);
        }
        if stalled {
            // restart momentum when the accelerated point is rejected
            y = x.clone();
            t = 1.0;
            continue;
        }
        if rel_change <= cfg.tol_obj || fx <= 0.5 * cfg.tol_feas * cfg.tol_feas {
            status = SolverStatus::Converged;
            break;
        }
    }
    Ok(RawSolution {
        matrix: x,
        iterations,
        status,
        history,
    })
}
