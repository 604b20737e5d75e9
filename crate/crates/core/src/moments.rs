//! Moments of `S_T(U) = d²(T, U)` over unitary ensembles, frame potentials,
//! design expansions and unitarity.

use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{overlap_with_unitary, ChoiMatrix, UNITARY_TOL, UTP_TOL};
use crate::clifford::{enumerate_cliffords, sample_clifford};
use crate::error::{Error, Result};
use crate::linalg::{haar_unitary, ComplexMatrix, SeedStream};
use crate::schur_weyl::partitions;

/// Largest design size accepted by [`frame_potential`].
pub const FRAME_POTENTIAL_MAX: usize = 12_000;

const MC_CHUNK: usize = 2_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DesignLabel {
    FullCliffordN1,
    FullCliffordN2,
    SampledClifford,
    HaarSampled,
    Custom,
}

impl DesignLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            DesignLabel::FullCliffordN1 => "full-clifford-n1",
            DesignLabel::FullCliffordN2 => "full-clifford-n2",
            DesignLabel::SampledClifford => "sampled-clifford",
            DesignLabel::HaarSampled => "haar-sampled",
            DesignLabel::Custom => "custom",
        }
    }
}

/// Finite set of unitaries averaged with uniform weight.
#[derive(Clone, Debug)]
pub struct DesignSet {
    d: usize,
    elements: Vec<ComplexMatrix>,
    label: DesignLabel,
}

impl DesignSet {
    pub fn new(elements: Vec<ComplexMatrix>, label: DesignLabel) -> Result<Self> {
        let d = elements
            .first()
            .ok_or_else(|| Error::InvalidInput("empty design".into()))?
            .rows();
        for u in &elements {
            if u.rows() != d || u.cols() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: u.rows(),
                });
            }
            let dev = u.unitarity_defect();
            if dev > UNITARY_TOL {
                return Err(Error::NotUnitary { deviation: dev });
            }
        }
        Ok(Self { d, elements, label })
    }

    /// The whole Clifford group on `n ≤ 2` qubits, modulo phase.
    pub fn full_clifford(n: usize) -> Result<Self> {
        let label = match n {
            1 => DesignLabel::FullCliffordN1,
            2 => DesignLabel::FullCliffordN2,
            _ => {
                return Err(Error::SizeCap {
                    what: "full Clifford design qubits",
                    limit: 2,
                    requested: n,
                })
            }
        };
        let elements = enumerate_cliffords(n)?
            .iter()
            .map(|t| t.to_unitary())
            .collect::<Result<Vec<_>>>()?;
        Self::new(elements, label)
    }

    pub fn sampled_clifford<R: Rng + ?Sized>(n: usize, count: usize, rng: &mut R) -> Result<Self> {
        let elements = (0..count)
            .map(|_| sample_clifford(n, rng)?.to_unitary())
            .collect::<Result<Vec<_>>>()?;
        Self::new(elements, DesignLabel::SampledClifford)
    }

    pub fn haar_sampled<R: Rng + ?Sized>(d: usize, count: usize, rng: &mut R) -> Result<Self> {
        let elements = (0..count).map(|_| haar_unitary(d, rng)).collect();
        Self::new(elements, DesignLabel::HaarSampled)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn label(&self) -> DesignLabel {
        self.label
    }
}

/// Summary of an empirical moment.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MomentReport {
    pub ensemble: String,
    pub k: u32,
    pub empirical: f64,
    pub analytic: Option<f64>,
    pub std_error: f64,
    pub samples: usize,
}

pub const MOMENT_CSV_HEADER: &str = "ensemble,k,samples,empirical,analytic,std_error";

impl MomentReport {
    pub fn csv_row(&self) -> String {
        let analytic = self.analytic.map(|a| a.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{}",
            self.ensemble, self.k, self.samples, self.empirical, analytic, self.std_error
        )
    }
}

/// Writes reports as CSV with [`MOMENT_CSV_HEADER`].
pub fn moments_to_csv(reports: &[MomentReport]) -> String {
    let mut s = String::from(MOMENT_CSV_HEADER);
    s.push('\n');
    for r in reports {
        let _ = writeln!(s, "{}", r.csv_row());
    }
    s
}

/// `S_T(U) = d²(T, U)`.
pub fn s_value(t: &ChoiMatrix, u: &ComplexMatrix) -> Result<f64> {
    let d = t.dim() as f64;
    Ok(d * d * overlap_with_unitary(u, t)?)
}

/// Closed form of `E_U[S_T²]` over the Haar measure (and any 2-design).
pub fn second_moment_analytic(t: &ChoiMatrix) -> f64 {
    let d = t.dim() as f64;
    let norm2 = t.matrix().frobenius_norm().powi(2);
    let fwd = t.image_of_identity();
    let bwd = t.adjoint_image_of_identity();
    let tr = fwd.trace();
    (d * d * norm2 + tr * tr - (fwd.frobenius_norm().powi(2) + bwd.frobenius_norm().powi(2)) / d) / (d * d - 1.0)
}

/// `Σ_{λ ⊢ k, ℓ(λ) ≤ d} d_λ²`, the Haar value of `E|Tr U|^{2k}`.
pub fn haar_trace_moment_analytic(d: usize, k: usize) -> Result<u64> {
    if k > crate::schur_weyl::MAX_DEGREE {
        return Err(Error::SizeCap {
            what: "trace moment order",
            limit: crate::schur_weyl::MAX_DEGREE,
            requested: k,
        });
    }
    Ok(partitions(k, d).iter().map(|l| (l.specht_dim() as u64).pow(2)).sum())
}

/// Source of unitaries for moment estimates.
#[derive(Clone, Copy, Debug)]
pub enum MomentEnsemble<'a> {
    Haar,
    Clifford,
    Design(&'a DesignSet),
}

impl MomentEnsemble<'_> {
    fn name(&self) -> String {
        match self {
            MomentEnsemble::Haar => "haar".into(),
            MomentEnsemble::Clifford => "clifford".into(),
            MomentEnsemble::Design(ds) => ds.label().as_str().into(),
        }
    }
}

/// Values of `f(U)` across the ensemble. For a design these are all
/// elements; otherwise `samples` draws in fixed chunks with one substream
/// each, so the output is independent of the thread count.
pub fn ensemble_values(
    d: usize,
    ensemble: MomentEnsemble<'_>,
    samples: usize,
    stream: SeedStream,
    f: impl Fn(&ComplexMatrix) -> Result<f64> + Sync,
) -> Result<Vec<f64>> {
    if let MomentEnsemble::Design(ds) = ensemble {
        if ds.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: ds.dim(),
            });
        }
        return ds.elements().par_iter().map(&f).collect();
    }
    if samples == 0 {
        return Err(Error::InvalidInput("at least one sample is required".into()));
    }
    let n = match ensemble {
        MomentEnsemble::Clifford => {
            if !d.is_power_of_two() {
                return Err(Error::InvalidInput(format!("dimension {d} is not a power of two")));
            }
            d.trailing_zeros() as usize
        }
        _ => 0,
    };
    let chunks = samples.div_ceil(MC_CHUNK);
    let parts: Vec<Result<Vec<f64>>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream.substream(c as u64).rng();
            let count = MC_CHUNK.min(samples - c * MC_CHUNK);
            (0..count)
                .map(|_| {
                    let u = match ensemble {
                        MomentEnsemble::Clifford => sample_clifford(n, &mut rng)?.to_unitary()?,
                        _ => haar_unitary(d, &mut rng),
                    };
                    f(&u)
                })
                .collect()
        })
        .collect();
    let mut out = Vec::with_capacity(samples);
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// `E[S_T^k]` over the ensemble. Design averages are exact and carry zero
/// standard error; `analytic` is filled for `k = 2` with the closed form.
pub fn moment_empirical(
    t: &ChoiMatrix,
    ensemble: MomentEnsemble<'_>,
    k: u32,
    samples: usize,
    stream: SeedStream,
) -> Result<MomentReport> {
    if !(1..=4).contains(&k) {
        return Err(Error::InvalidInput(format!("moment order {k} outside 1..=4")));
    }
    let vals = ensemble_values(t.dim(), ensemble, samples, stream, |u| s_value(t, u))?;
    let powers: Vec<f64> = vals.iter().map(|s| s.powi(k as i32)).collect();
    let (empirical, se) = mean_and_se(&powers);
    let exact = matches!(ensemble, MomentEnsemble::Design(_));
    Ok(MomentReport {
        ensemble: ensemble.name(),
        k,
        empirical,
        analytic: (k == 2).then(|| second_moment_analytic(t)),
        std_error: if exact { 0.0 } else { se },
        samples: vals.len(),
    })
}

/// `E[S⁴] / E[S²]²` from a common set of draws.
pub fn fourth_moment_ratio(
    t: &ChoiMatrix,
    ensemble: MomentEnsemble<'_>,
    samples: usize,
    stream: SeedStream,
) -> Result<f64> {
    let vals = ensemble_values(t.dim(), ensemble, samples, stream, |u| s_value(t, u))?;
    let n = vals.len() as f64;
    let m2 = vals.iter().map(|s| s * s).sum::<f64>() / n;
    let m4 = vals.iter().map(|s| s.powi(4)).sum::<f64>() / n;
    if m2 <= f64::MIN_POSITIVE {
        return Err(Error::Degenerate("second moment vanishes".into()));
    }
    Ok(m4 / (m2 * m2))
}

/// `(1/N²) Σ_{j,k} |Tr(U_j† U_k)|^{2t}`.
pub fn frame_potential(design: &DesignSet, t: u32) -> Result<f64> {
    let n = design.len();
    if n > FRAME_POTENTIAL_MAX {
        return Err(Error::SizeCap {
            what: "frame potential design size",
            limit: FRAME_POTENTIAL_MAX,
            requested: n,
        });
    }
    if !(1..=3).contains(&t) {
        return Err(Error::InvalidInput(format!("frame potential order {t} outside 1..=3")));
    }
    let els = design.elements();
    let rows: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|j| {
            let uj = &els[j];
            let mut acc = 0.0;
            for uk in &els[j + 1..] {
                acc += uj.hs_inner(uk).norm_sqr().powi(t as i32);
            }
            2.0 * acc + uj.hs_inner(uj).norm_sqr().powi(t as i32)
        })
        .collect();
    Ok(rows.iter().sum::<f64>() / (n as f64 * n as f64))
}

/// `C = d(d+1)(d²−1)`.
pub fn expansion_constant(d: usize) -> f64 {
    let d = d as f64;
    d * (d + 1.0) * (d * d - 1.0)
}

/// Affine coefficients `c_k = C·f_k − C/d + 1` from average gate
/// fidelities `f_k` of a trace-preserving map against the design elements.
pub fn coeffs_from_agfs(agfs: &[f64], d: usize) -> Vec<f64> {
    let c = expansion_constant(d);
    let df = d as f64;
    agfs.iter().map(|f| c * f - c / df + 1.0).collect()
}

/// Coefficients `c_k` with `(1/N) Σ_k c_k U_k = X` for a unital
/// trace-preserving `X` and a unitary 2-design.
pub fn design_expansion_coeffs(x: &ChoiMatrix, design: &DesignSet) -> Result<Vec<f64>> {
    let dev = x.utp_defect();
    if dev > UTP_TOL || (x.trace() - 1.0).abs() > UTP_TOL {
        return Err(Error::NotUnitalTp { deviation: dev });
    }
    let f = design_agfs(x, design)?;
    Ok(coeffs_from_agfs(&f, x.dim()))
}

/// `F_avg(U_k, X)` for every design element.
pub fn design_agfs(x: &ChoiMatrix, design: &DesignSet) -> Result<Vec<f64>> {
    if design.dim() != x.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            found: design.dim(),
        });
    }
    let d = x.dim() as f64;
    let tr = x.trace();
    design
        .elements()
        .iter()
        .map(|u| Ok((d * overlap_with_unitary(u, x)? + tr) / (d + 1.0)))
        .collect()
}

/// `Σ_k w_k J(U_k) / N`.
pub fn design_combination(design: &DesignSet, weights: &[f64]) -> Result<ChoiMatrix> {
    if weights.len() != design.len() {
        return Err(Error::DimensionMismatch {
            expected: design.len(),
            found: weights.len(),
        });
    }
    let d = design.dim();
    let mut m = crate::linalg::HermitianMatrix::zeros(d * d);
    let n = design.len() as f64;
    for (u, w) in design.elements().iter().zip(weights) {
        m.add_rank_one(w / (n * d as f64), u.as_slice());
    }
    ChoiMatrix::new(d, m)
}

/// Unitarity `Tr[X₀†X₀]/(d²−1)` of the block of the Pauli transfer matrix
/// orthogonal to the identity, computed basis-free from
/// `‖L‖² = d²‖J‖²`, `L₀₀ = Tr J` and the off-block norms.
pub fn unitarity(x: &ChoiMatrix) -> f64 {
    let d = x.dim() as f64;
    let full = d * d * x.matrix().frobenius_norm().powi(2);
    let corner = x.trace().powi(2);
    let off = d * d * crate::channel::utp_deviation_formula(x);
    (full - corner - off) / (d * d - 1.0)
}

/// Population variance of `F_avg(U_k, X)` over the design, and
/// `u(X)/(d²(d+1)²)`.
pub fn agf_variance_identity_check(x: &ChoiMatrix, design: &DesignSet) -> Result<(f64, f64)> {
    let f = design_agfs(x, design)?;
    let n = f.len() as f64;
    let mean = f.iter().sum::<f64>() / n;
    let var = f.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let d = x.dim() as f64;
    Ok((var, unitarity(x) / (d * d * (d + 1.0).powi(2))))
}

/// One row of [`tail_check`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TailRow {
    pub t: f64,
    pub empirical: f64,
    pub bound: f64,
}

/// Exponent `κ = 1 − 1/(2e)` of the tail bound `P[|Tr U|² ≥ t] ≤ e^{−κt+2}`.
pub fn tail_exponent() -> f64 {
    1.0 - 1.0 / (2.0 * std::f64::consts::E)
}

/// Empirical exceedance of `|Tr U|²` for Haar `U` at `t ∈ {0, 1, 2, 4, 8}`.
pub fn tail_check(d: usize, samples: usize, stream: SeedStream) -> Result<Vec<TailRow>> {
    let vals = ensemble_values(d, MomentEnsemble::Haar, samples, stream, |u| Ok(u.trace().norm_sqr()))?;
    let kappa = tail_exponent();
    Ok([0.0, 1.0, 2.0, 4.0, 8.0]
        .iter()
        .map(|&t| TailRow {
            t,
            empirical: vals.iter().filter(|&&s| s >= t).count() as f64 / vals.len() as f64,
            bound: (-kappa * t + 2.0).exp(),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{choi_of_unitary, random_unitary_channel, unitary_depolarizing_mixture};

    #[test]
    fn haar_moment_table() {
        assert_eq!(haar_trace_moment_analytic(2, 2).unwrap(), 2);
        assert_eq!(haar_trace_moment_analytic(2, 3).unwrap(), 5);
        assert_eq!(haar_trace_moment_analytic(4, 4).unwrap(), 24);
        assert_eq!(haar_trace_moment_analytic(8, 4).unwrap(), 24);
        assert_eq!(haar_trace_moment_analytic(2, 4).unwrap(), 14);
    }

    #[test]
    fn s_value_special_cases() {
        let mut rng = SeedStream::new(1, 0).rng();
        let u = haar_unitary(3, &mut rng);
        let t = choi_of_unitary(&u).unwrap();
        assert!((s_value(&t, &u).unwrap() - 9.0).abs() < 1e-10);
        let dep = ChoiMatrix::depolarizing(3);
        assert!((s_value(&dep, &u).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(second_moment_analytic(&ChoiMatrix::zero(3)), 0.0);
        assert!((second_moment_analytic(&t) - 2.0).abs() < 1e-10);
    }

    #[test]
    fn full_design_frame_potentials() {
        let ds = DesignSet::full_clifford(1).unwrap();
        assert!((frame_potential(&ds, 2).unwrap() - 2.0).abs() < 1e-10);
        assert!((frame_potential(&ds, 3).unwrap() - 5.0).abs() < 1e-10);
        let single = DesignSet::new(vec![ComplexMatrix::identity(2)], DesignLabel::Custom).unwrap();
        assert!((frame_potential(&single, 2).unwrap() - 16.0).abs() < 1e-12);
    }

    #[test]
    fn unitarity_special_cases() {
        let mut rng = SeedStream::new(2, 0).rng();
        let u = haar_unitary(4, &mut rng);
        assert!((unitarity(&choi_of_unitary(&u).unwrap()) - 1.0).abs() < 1e-10);
        assert!(unitarity(&ChoiMatrix::depolarizing(4)).abs() < 1e-12);
        let mix = unitary_depolarizing_mixture(&u, 0.3).unwrap();
        assert!((unitarity(&mix) - 0.09).abs() < 1e-10);
        let x = random_unitary_channel(2, &mut rng);
        let l = crate::channel::LiouvilleMatrix::from_choi(&x).unwrap();
        assert!((l.unital_block_norm_sqr() / 3.0 - unitarity(&x)).abs() < 1e-10);
    }

    #[test]
    fn non_utp_expansion_rejected() {
        let ds = DesignSet::full_clifford(1).unwrap();
        let x = ChoiMatrix::identity_channel(2).scale(0.5);
        assert!(matches!(design_expansion_coeffs(&x, &ds), Err(Error::NotUnitalTp { .. })));
    }

    #[test]
    fn zero_map_ratio_is_degenerate() {
        let r = fourth_moment_ratio(&ChoiMatrix::zero(2), MomentEnsemble::Haar, 10, SeedStream::new(0, 0));
        assert!(matches!(r, Err(Error::Degenerate(_))));
    }
}
