//! Simulated AGF measurements against random Cliffords, the induced linear
//! measurement map, and direct fidelity estimation.
//!
//! Measurement `i` is `A_i(Z) = (c_i† Z c_i + Tr Z)/(d + 1)` with
//! `c_i = vec(C_i)`. On unital trace-preserving Choi matrices this is the
//! average gate fidelity between `C_i` and `Z`.

use num_complex::Complex64 as C64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{avg_gate_fidelity, vectorize, ChoiMatrix};
use crate::clifford::{sample_clifford, CliffordTableau};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, HermitianMatrix, SeedStream, ZERO};
use crate::pauli::PauliOperator;

/// Largest qubit count accepted by [`dfe_estimate`].
pub const DFE_MAX_QUBITS: usize = 2;
/// Largest simulated channel-use count for a single DFE run.
pub const DFE_MAX_CHANNEL_USES: u64 = 50_000_000;

const POWER_ITERS: usize = 10_000;
const POWER_TOL: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    None,
    /// Uniform on the sphere of radius `eta`.
    Sphere,
    /// I.i.d. normal entries with standard deviation `eta`.
    Gaussian,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub eta: f64,
}

impl NoiseSpec {
    pub fn new(kind: NoiseKind, eta: f64) -> Result<Self> {
        if !(eta.is_finite() && eta >= 0.0) {
            return Err(Error::InvalidInput(format!("noise strength {eta} must be finite and non-negative")));
        }
        Ok(Self { kind, eta })
    }

    pub fn none() -> Self {
        Self {
            kind: NoiseKind::None,
            eta: 0.0,
        }
    }

    pub fn sphere(eta: f64) -> Result<Self> {
        Self::new(NoiseKind::Sphere, eta)
    }

    pub fn gaussian(eta: f64) -> Result<Self> {
        Self::new(NoiseKind::Gaussian, eta)
    }

    pub fn is_noiseless(&self) -> bool {
        self.kind == NoiseKind::None || self.eta == 0.0
    }

    pub fn sample<R: Rng + ?Sized>(&self, m: usize, rng: &mut R) -> Vec<f64> {
        match self.kind {
            NoiseKind::None => vec![0.0; m],
            NoiseKind::Gaussian => (0..m).map(|_| self.eta * rng.sample::<f64, _>(StandardNormal)).collect(),
            NoiseKind::Sphere => loop {
                let g: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
                let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm > 1e-300 {
                    break g.into_iter().map(|x| x * self.eta / norm).collect();
                }
            },
        }
    }
}

/// Settings, outcomes and provenance of one simulated experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub d: usize,
    pub settings: Vec<CliffordTableau>,
    pub f: Vec<f64>,
    pub noise: NoiseSpec,
    pub master_seed: u64,
    pub stream_id: u64,
}

impl MeasurementRecord {
    pub fn validate(&self) -> Result<()> {
        if self.settings.is_empty() {
            return Err(Error::InvalidInput("record has no settings".into()));
        }
        if self.settings.len() != self.f.len() {
            return Err(Error::DimensionMismatch {
                expected: self.settings.len(),
                found: self.f.len(),
            });
        }
        for t in &self.settings {
            if 1usize << t.num_qubits() != self.d {
                return Err(Error::DimensionMismatch {
                    expected: self.d,
                    found: 1 << t.num_qubits(),
                });
            }
        }
        if let Some(v) = self.f.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite outcome {v}")));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f.is_empty()
    }

    pub fn seed(&self) -> SeedStream {
        SeedStream::new(self.master_seed, self.stream_id)
    }

    pub fn measurement_map(&self) -> Result<MeasurementMap> {
        MeasurementMap::from_settings(&self.settings)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: Self = serde_json::from_str(text)?;
        r.validate()?;
        Ok(r)
    }
}

/// Draws `m` uniform Cliffords and records `f_i = F_avg(C_i, X) + ε_i`.
///
/// Setting `i` comes from substream `i` of `stream`; the noise vector from
/// substream `m`.
pub fn simulate_agfs(x: &ChoiMatrix, m: usize, noise: NoiseSpec, stream: SeedStream) -> Result<MeasurementRecord> {
    if m == 0 {
        return Err(Error::InvalidInput("at least one measurement is required".into()));
    }
    let d = x.dim();
    if !d.is_power_of_two() || d < 2 {
        return Err(Error::InvalidInput(format!("dimension {d} is not a qubit dimension")));
    }
    let n = d.trailing_zeros() as usize;
    let drawn: Vec<(CliffordTableau, f64)> = (0..m)
        .into_par_iter()
        .map(|i| {
            let t = sample_clifford(n, &mut stream.substream(i as u64).rng())?;
            let f = avg_gate_fidelity(&t.to_unitary()?, x)?;
            Ok((t, f))
        })
        .collect::<Result<_>>()?;
    let eps = noise.sample(m, &mut stream.substream(m as u64).rng());
    let (settings, clean): (Vec<_>, Vec<_>) = drawn.into_iter().unzip();
    let f = clean.iter().zip(&eps).map(|(a, b)| a + b).collect();
    Ok(MeasurementRecord {
        d,
        settings,
        f,
        noise,
        master_seed: stream.master_seed,
        stream_id: stream.stream_id,
    })
}

/// Dense representation of `A` through the vectors `c_i = vec(C_i)`.
#[derive(Clone, Debug)]
pub struct MeasurementMap {
    d: usize,
    vectors: Vec<Vec<C64>>,
}

impl MeasurementMap {
    pub fn from_settings(settings: &[CliffordTableau]) -> Result<Self> {
        let unitaries = settings.iter().map(|t| t.to_unitary()).collect::<Result<Vec<_>>>()?;
        Self::from_unitaries(&unitaries)
    }

    pub fn from_unitaries(unitaries: &[ComplexMatrix]) -> Result<Self> {
        let d = unitaries
            .first()
            .ok_or_else(|| Error::InvalidInput("no measurement settings".into()))?
            .rows();
        let mut vectors = Vec::with_capacity(unitaries.len());
        for u in unitaries {
            if u.rows() != d || u.cols() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: u.rows(),
                });
            }
            let dev = u.unitarity_defect();
            if dev > crate::channel::UNITARY_TOL {
                return Err(Error::NotUnitary { deviation: dev });
            }
            vectors.push(vectorize(u));
        }
        Ok(Self { d, vectors })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    fn check_operand(&self, z: &HermitianMatrix) -> Result<()> {
        if z.dim() != self.d * self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d * self.d,
                found: z.dim(),
            });
        }
        Ok(())
    }

    /// `A(Z)`.
    pub fn apply(&self, z: &HermitianMatrix) -> Result<Vec<f64>> {
        self.check_operand(z)?;
        let tr = z.trace();
        let scale = 1.0 / (self.d as f64 + 1.0);
        Ok(self.vectors.iter().map(|c| (z.expectation(c) + tr) * scale).collect())
    }

    /// `A(Z)` without the trace term, i.e. the measurement of the part of
    /// `Z` orthogonal to the identity.
    pub fn apply_traceless(&self, z: &HermitianMatrix) -> Result<Vec<f64>> {
        self.check_operand(z)?;
        let scale = 1.0 / (self.d as f64 + 1.0);
        Ok(self.vectors.iter().map(|c| z.expectation(c) * scale).collect())
    }

    /// `A†(y) = Σ_i y_i (c_i c_i† + Id)/(d + 1)`.
    pub fn adjoint(&self, y: &[f64]) -> Result<HermitianMatrix> {
        let mut out = self.adjoint_rank_one_part(y)?;
        let s: f64 = y.iter().sum::<f64>() / (self.d as f64 + 1.0);
        if s != 0.0 {
            out.add_scaled(s, &HermitianMatrix::identity(self.d * self.d));
        }
        Ok(out)
    }

    /// `Σ_i y_i c_i c_i†/(d + 1)`.
    pub fn adjoint_rank_one_part(&self, y: &[f64]) -> Result<HermitianMatrix> {
        if y.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: y.len(),
            });
        }
        let scale = 1.0 / (self.d as f64 + 1.0);
        let mut out = HermitianMatrix::zeros(self.d * self.d);
        for (c, &yi) in self.vectors.iter().zip(y) {
            if yi != 0.0 {
                out.add_rank_one(yi * scale, c);
            }
        }
        Ok(out)
    }

    /// Matrix `A_i` of measurement `i`.
    pub fn operator(&self, i: usize) -> HermitianMatrix {
        let mut y = vec![0.0; self.len()];
        y[i] = 1.0;
        self.adjoint(&y).expect("length matches")
    }

    fn overlaps(&self) -> Vec<f64> {
        let m = self.len();
        let mut g = vec![0.0; m * m];
        for i in 0..m {
            g[i * m + i] = (self.d * self.d) as f64;
            for j in (i + 1)..m {
                let ip: C64 = self.vectors[i]
                    .iter()
                    .zip(&self.vectors[j])
                    .fold(ZERO, |acc, (a, b)| acc + a.conj() * b);
                let v = ip.norm_sqr();
                g[i * m + j] = v;
                g[j * m + i] = v;
            }
        }
        g
    }

    /// Row-major Gram matrix `G_ij = Tr(A_i A_j) = (|Tr C_i†C_j|² + 2d + d²)/(d + 1)²`.
    pub fn gram(&self) -> Vec<f64> {
        let d = self.d as f64;
        let s = 1.0 / ((d + 1.0) * (d + 1.0));
        self.overlaps().into_iter().map(|v| (v + 2.0 * d + d * d) * s).collect()
    }

    /// Gram matrix of the measurement operators projected onto the maps with
    /// vanishing partial traces, `(|Tr C_i†C_j|² − 1)/(d + 1)²`.
    pub fn projected_gram(&self) -> Vec<f64> {
        let d = self.d as f64;
        let s = 1.0 / ((d + 1.0) * (d + 1.0));
        self.overlaps().into_iter().map(|v| (v - 1.0) * s).collect()
    }

    /// `‖A‖_op`, by power iteration on the Gram matrix `A A†`, which shares
    /// its nonzero spectrum with `A†A`.
    pub fn operator_norm(&self) -> f64 {
        power_iteration(&self.gram(), self.len()).sqrt()
    }
}

/// Largest eigenvalue of a symmetric positive semidefinite row-major matrix.
pub(crate) fn power_iteration(g: &[f64], m: usize) -> f64 {
    let mut v = vec![1.0 / (m as f64).sqrt(); m];
    let mut lambda = 0.0;
    for it in 0..POWER_ITERS {
        let mut w = vec![0.0; m];
        for (i, wi) in w.iter_mut().enumerate() {
            *wi = g[i * m..(i + 1) * m].iter().zip(&v).map(|(a, b)| a * b).sum();
        }
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        let next = norm;
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / norm;
        }
        if it > 0 && (next - lambda).abs() <= POWER_TOL * next {
            return next;
        }
        lambda = next;
    }
    lambda
}

pub fn measurement_map_apply(settings: &[CliffordTableau], z: &HermitianMatrix) -> Result<Vec<f64>> {
    MeasurementMap::from_settings(settings)?.apply(z)
}

pub fn adjoint_measurement_apply(settings: &[CliffordTableau], y: &[f64]) -> Result<HermitianMatrix> {
    MeasurementMap::from_settings(settings)?.adjoint(y)
}

/// Result of a simulated direct fidelity estimation run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DfeOutcome {
    pub estimate: f64,
    pub channel_uses: u64,
}

/// Shots needed for `P(|f̂ − f| > ε) ≤ δ` with `±1`-bounded single-shot
/// estimators (Hoeffding): `⌈2 ln(2/δ)/ε²⌉`.
pub fn dfe_channel_uses(eps_f: f64, delta0: f64) -> Result<u64> {
    if !(eps_f > 0.0 && eps_f.is_finite()) || !(delta0 > 0.0 && delta0 < 1.0) {
        return Err(Error::InvalidInput(format!(
            "need eps > 0 and 0 < delta < 1, got eps = {eps_f}, delta = {delta0}"
        )));
    }
    let mu = (2.0 * (2.0 / delta0).ln() / (eps_f * eps_f)).ceil();
    if mu > DFE_MAX_CHANNEL_USES as f64 {
        return Err(Error::BudgetExceeded {
            needed: mu.min(u64::MAX as f64) as u64,
            cap: DFE_MAX_CHANNEL_USES,
        });
    }
    Ok(mu as u64)
}

/// `⟨ψ|P|ψ⟩` for a Hermitian Pauli.
fn pauli_expectation(p: &PauliOperator, psi: &[C64]) -> f64 {
    let mut acc = ZERO;
    for (j, amp) in psi.iter().enumerate() {
        if *amp == ZERO {
            continue;
        }
        let (ph, k) = p.apply_basis(j);
        acc += psi[k].conj() * ph * amp;
    }
    acc.re
}

/// Estimates `(J(C), J(U)) = |Tr(C†U)|²/d²` by Pauli importance sampling on the
/// stabilizer Choi state of `c`.
///
/// Labels `k` of the `2n`-qubit Paulis are drawn with probability
/// `⟨P_k⟩_C²/d²`. Each label costs one use of `U`: a single `±1` outcome of
/// `P_k` on the Choi state of `U`, drawn from the exact outcome
/// probabilities, weighted by `1/⟨P_k⟩_C`.
pub fn dfe_estimate<R: Rng + ?Sized>(
    u: &ComplexMatrix,
    c: &CliffordTableau,
    eps_f: f64,
    delta0: f64,
    rng: &mut R,
) -> Result<DfeOutcome> {
    let n = c.num_qubits();
    if n > DFE_MAX_QUBITS {
        return Err(Error::SizeCap {
            what: "DFE qubits",
            limit: DFE_MAX_QUBITS,
            requested: n,
        });
    }
    let d = 1usize << n;
    if u.rows() != d || u.cols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: u.rows(),
        });
    }
    let dev = u.unitarity_defect();
    if dev > crate::channel::UNITARY_TOL {
        return Err(Error::NotUnitary { deviation: dev });
    }
    let shots = dfe_channel_uses(eps_f, delta0)?;
    let norm = 1.0 / (d as f64).sqrt();
    let target: Vec<C64> = c.to_unitary()?.as_slice().iter().map(|z| z * norm).collect();
    let probe: Vec<C64> = u.as_slice().iter().map(|z| z * norm).collect();
    let labels = d * d * d * d;
    let mut chi = Vec::with_capacity(labels);
    let mut signal = Vec::with_capacity(labels);
    for k in 0..labels {
        let p = PauliOperator::from_index(2 * n, k);
        chi.push(pauli_expectation(&p, &target));
        signal.push(pauli_expectation(&p, &probe));
    }
    let weights: Vec<f64> = chi.iter().map(|x| x * x).collect();
    let sampler = WeightedIndex::new(&weights).map_err(|e| Error::Degenerate(e.to_string()))?;
    let mut sum = 0.0;
    for _ in 0..shots {
        let k = sampler.sample(rng);
        let p_plus = 0.5 * (1.0 + signal[k]);
        let outcome = if rng.random::<f64>() < p_plus { 1.0 } else { -1.0 };
        sum += outcome / chi[k];
    }
    Ok(DfeOutcome {
        estimate: sum / shots as f64,
        channel_uses: shots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{choi_of_unitary, random_cptp};
    use crate::linalg::{eigh, haar_unitary, random_hermitian};

    #[test]
    fn sphere_noise_has_exact_radius() {
        let mut rng = SeedStream::new(1, 0).rng();
        for m in [1, 5, 80] {
            let e = NoiseSpec::sphere(0.3).unwrap().sample(m, &mut rng);
            let r = e.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((r - 0.3).abs() < 1e-12);
        }
        assert!(NoiseSpec::sphere(-1.0).is_err());
    }

    #[test]
    fn gram_matches_operator_inner_products() {
        let mut rng = SeedStream::new(2, 0).rng();
        let settings: Vec<_> = (0..6).map(|_| sample_clifford(2, &mut rng).unwrap()).collect();
        let a = MeasurementMap::from_settings(&settings).unwrap();
        let g = a.gram();
        let ops: Vec<_> = (0..6).map(|i| a.operator(i)).collect();
        for i in 0..6 {
            for j in 0..6 {
                assert!((g[i * 6 + j] - ops[i].inner(&ops[j])).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn operator_norm_matches_dense_spectrum() {
        let mut rng = SeedStream::new(3, 0).rng();
        let settings: Vec<_> = (0..12).map(|_| sample_clifford(2, &mut rng).unwrap()).collect();
        let a = MeasurementMap::from_settings(&settings).unwrap();
        let g = a.gram();
        let gm = ComplexMatrix::from_fn(12, 12, |i, j| C64::new(g[i * 12 + j], 0.0));
        let top = *eigh(&HermitianMatrix::new(gm).unwrap()).unwrap().values.last().unwrap();
        assert!((a.operator_norm() - top.sqrt()).abs() < 1e-9 * top.sqrt());
    }

    #[test]
    fn adjoint_identity_on_random_pairs() {
        let mut rng = SeedStream::new(4, 0).rng();
        let settings: Vec<_> = (0..7).map(|_| sample_clifford(1, &mut rng).unwrap()).collect();
        let a = MeasurementMap::from_settings(&settings).unwrap();
        for _ in 0..20 {
            let z = random_hermitian(4, &mut rng);
            let y: Vec<f64> = (0..7).map(|_| rng.random::<f64>() - 0.5).collect();
            let lhs: f64 = a.apply(&z).unwrap().iter().zip(&y).map(|(p, q)| p * q).sum();
            let rhs = z.inner(&a.adjoint(&y).unwrap());
            assert!((lhs - rhs).abs() < 1e-10);
        }
        assert_eq!(a.adjoint(&[0.0; 7]).unwrap().frobenius_norm(), 0.0);
        assert!(a.adjoint(&[0.0; 3]).is_err());
    }

    #[test]
    fn measurement_of_own_choi_is_one_and_traceless_has_no_shift() {
        let mut rng = SeedStream::new(5, 0).rng();
        let settings: Vec<_> = (0..4).map(|_| sample_clifford(2, &mut rng).unwrap()).collect();
        let a = MeasurementMap::from_settings(&settings).unwrap();
        for (i, t) in settings.iter().enumerate() {
            let j = choi_of_unitary(&t.to_unitary().unwrap()).unwrap();
            assert!((a.apply(j.matrix()).unwrap()[i] - 1.0).abs() < 1e-12);
        }
        let mut z = random_hermitian(16, &mut rng);
        let tr = z.trace() / 16.0;
        z.add_scaled(-tr, &HermitianMatrix::identity(16));
        let full = a.apply(&z).unwrap();
        let bare = a.apply_traceless(&z).unwrap();
        for (p, q) in full.iter().zip(&bare) {
            assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn simulated_outcomes_agree_with_map() {
        let mut rng = SeedStream::new(6, 0).rng();
        let x = random_cptp(4, 2, &mut rng);
        let rec = simulate_agfs(&x, 30, NoiseSpec::none(), SeedStream::new(7, 1)).unwrap();
        let via_map = measurement_map_apply(&rec.settings, x.matrix()).unwrap();
        for (p, q) in rec.f.iter().zip(&via_map) {
            assert!((p - q).abs() < 1e-10);
        }
        let again = simulate_agfs(&x, 30, NoiseSpec::none(), SeedStream::new(7, 1)).unwrap();
        assert_eq!(rec, again);
    }

    #[test]
    fn record_json_round_trip_is_exact() {
        let mut rng = SeedStream::new(8, 0).rng();
        let x = choi_of_unitary(&haar_unitary(4, &mut rng)).unwrap();
        let rec = simulate_agfs(&x, 25, NoiseSpec::gaussian(0.01).unwrap(), SeedStream::new(u64::MAX, 3)).unwrap();
        let text = rec.to_json().unwrap();
        let back = MeasurementRecord::from_json(&text).unwrap();
        assert_eq!(back, rec);
        for (a, b) in back.f.iter().zip(&rec.f) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["noise"]["kind"], "gaussian");
        assert!(v["settings"][0].is_string());
    }

    #[test]
    fn channel_use_count_follows_hoeffding() {
        assert_eq!(dfe_channel_uses(0.1, 0.05).unwrap(), (200.0 * 40f64.ln()).ceil() as u64);
        assert!(matches!(dfe_channel_uses(1e-5, 0.05), Err(Error::BudgetExceeded { .. })));
        assert!(dfe_channel_uses(0.1, 1.5).is_err());
    }
}
