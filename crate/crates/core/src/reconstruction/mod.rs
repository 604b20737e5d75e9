//! Constrained least-squares reconstruction of unital trace-preserving
//! channels from AGF records, plus closed-form inversion on a full design.

mod admm;
mod apg;
mod projections;

pub use projections::{
    dykstra_projection, marginal_gap, project_affine_utp, project_marginal_free, project_psd, DykstraOutcome,
};

use serde::{Deserialize, Serialize};

use crate::channel::{ChoiMatrix, LiouvilleMatrix};
use crate::error::{Error, Result};
use crate::linalg::{eigh, schatten_norm, HermitianMatrix, SchattenP};
use crate::measurement::{MeasurementMap, MeasurementRecord};
use crate::moments::{coeffs_from_agfs, design_combination, DesignSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverAlgorithm {
    /// Alternating directions with an exact ridge step on the affine set.
    Admm,
    /// Accelerated projected gradient with Dykstra inner projections.
    ProjectedGradient,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepRule {
    FixedInverseLipschitz,
    Backtracking,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataFit {
    LeastSquares,
    /// Smoothed ℓ₁ loss, quadratic on `|e| ≤ delta`.
    Huber { delta: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub algorithm: SolverAlgorithm,
    pub max_iters: usize,
    pub tol_obj: f64,
    pub tol_feas: f64,
    pub step_rule: StepRule,
    pub dykstra_iters: usize,
    pub data_fit: DataFit,
    /// ADMM penalty as a multiple of the mean eigenvalue of the normal
    /// operator `B†B` on the marginal-free subspace, `m(d−1)/((d+1)(d²−1)²)`.
    pub penalty: f64,
    /// Residual balancing of the penalty every few iterations.
    pub adaptive_penalty: bool,
    /// ADMM over-relaxation factor in `(0, 2)`.
    pub relaxation: f64,
    /// Keep the per-iteration objective in the result.
    pub record_history: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            algorithm: SolverAlgorithm::Admm,
            max_iters: 20_000,
            tol_obj: 1e-9,
            tol_feas: 1e-9,
            step_rule: StepRule::FixedInverseLipschitz,
            dykstra_iters: 500,
            data_fit: DataFit::LeastSquares,
            penalty: 0.5,
            adaptive_penalty: false,
            relaxation: 1.6,
            record_history: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x > 0.0 && x.is_finite();
        if self.max_iters == 0 || self.dykstra_iters == 0 {
            return Err(Error::InvalidInput("iteration limits must be at least one".into()));
        }
        if !positive(self.tol_obj) || !positive(self.tol_feas) || !positive(self.penalty) {
            return Err(Error::InvalidInput("tolerances and penalty must be positive".into()));
        }
        if !(self.relaxation > 0.0 && self.relaxation < 2.0) {
            return Err(Error::InvalidInput("relaxation must lie in (0, 2)".into()));
        }
        match self.data_fit {
            DataFit::Huber { delta } if !positive(delta) => {
                Err(Error::InvalidInput("Huber width must be positive".into()))
            }
            DataFit::Huber { .. } if self.algorithm == SolverAlgorithm::Admm => Err(Error::InvalidInput(
                "the Huber data fit requires the projected-gradient solver".into(),
            )),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverStatus {
    Converged,
    MaxIters,
    InfeasibleTolerance,
}

impl SolverStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolverStatus::Converged => "converged",
            SolverStatus::MaxIters => "max_iters",
            SolverStatus::InfeasibleTolerance => "infeasible_tolerance",
        }
    }
}

pub(crate) struct RawSolution {
    matrix: HermitianMatrix,
    iterations: usize,
    status: SolverStatus,
    history: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReconstructionResult {
    #[serde(skip)]
    pub estimate: Option<ChoiMatrix>,
    pub status: SolverStatus,
    /// `‖A(Z) − f‖₂` at the returned point.
    pub objective: f64,
    /// Largest partial-trace deviation from `Id/d` (Frobenius).
    pub feasibility: f64,
    pub min_eigenvalue: f64,
    pub iterations: usize,
    pub eps_rec: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub history: Vec<f64>,
}

impl ReconstructionResult {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    /// Reconstructed Choi matrix as CSV, if present.
    pub fn estimate_csv(&self) -> Option<String> {
        self.estimate.as_ref().map(|z| z.to_csv_string())
    }
}

/// Approximate minimizer of `‖A(Z) − f‖₂` over unital trace-preserving
/// Choi matrices.
pub fn reconstruct(record: &MeasurementRecord, cfg: &SolverConfig) -> Result<ReconstructionResult> {
    record.validate()?;
    cfg.validate()?;
    let map = record.measurement_map()?;
    reconstruct_with_map(&map, &record.f, cfg)
}

/// As [`reconstruct`], also reporting the Frobenius error against `truth`.
pub fn reconstruct_against(
    record: &MeasurementRecord,
    cfg: &SolverConfig,
    truth: &ChoiMatrix,
) -> Result<ReconstructionResult> {
    let mut res = reconstruct(record, cfg)?;
    let z = res.estimate.as_ref().expect("solver returns an estimate");
    res.eps_rec = Some(reconstruction_error(z, truth, SchattenP::Two)?);
    Ok(res)
}

pub fn reconstruct_with_map(map: &MeasurementMap, f: &[f64], cfg: &SolverConfig) -> Result<ReconstructionResult> {
    cfg.validate()?;
    if f.len() != map.len() || f.is_empty() {
        return Err(Error::DimensionMismatch {
            expected: map.len(),
            found: f.len(),
        });
    }
    let d = map.dim();
    let raw = match cfg.algorithm {
        SolverAlgorithm::Admm => admm::solve(map, f, cfg)?,
        SolverAlgorithm::ProjectedGradient => apg::solve(map, f, cfg)?,
    };
    let mut z = raw.matrix;
    let mut feasibility = marginal_gap(&z, d)?;
    let mut status = raw.status;
    if feasibility > cfg.tol_feas {
        let polished = dykstra_projection(&z, d, cfg.dykstra_iters, cfg.tol_feas)?;
        z = polished.matrix;
        feasibility = polished.gap;
    }
    if feasibility > cfg.tol_feas && status == SolverStatus::Converged {
        status = SolverStatus::InfeasibleTolerance;
    }
    let min_eigenvalue = eigh(&z)?.values[0];
    let objective = map
        .apply(&z)?
        .iter()
        .zip(f)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    Ok(ReconstructionResult {
        estimate: Some(ChoiMatrix::new(d, z)?),
        status,
        objective,
        feasibility,
        min_eigenvalue,
        iterations: raw.iterations,
        eps_rec: None,
        history: raw.history,
    })
}

/// Schatten-`p` norm of `J(Z) − J(X)`.
pub fn reconstruction_error(z: &ChoiMatrix, x: &ChoiMatrix, p: SchattenP) -> Result<f64> {
    if z.dim() != x.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            found: z.dim(),
        });
    }
    schatten_norm(&(z.matrix() - x.matrix()), p)
}

/// `(1/N) Σ c_k L(U_k)` from the AGFs of every element of a full design.
pub fn linear_inversion_2design(agfs: &[f64], design: &DesignSet) -> Result<LiouvilleMatrix> {
    if agfs.len() != design.len() {
        return Err(Error::DimensionMismatch {
            expected: design.len(),
            found: agfs.len(),
        });
    }
    let c = coeffs_from_agfs(agfs, design.dim());
    LiouvilleMatrix::from_choi(&design_combination(design, &c)?)
}
