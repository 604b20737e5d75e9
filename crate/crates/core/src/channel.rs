//! Linear maps on `d×d` matrices in Choi, Liouville and Kraus form.
//!
//! The Choi matrix of `X` is `J(X) = (X ⊗ Id)(|ψ⟩⟨ψ|)` with the output as
//! the first (most significant) tensor factor. Vectorization is row-major,
//! `vec(A)[i·d + k] = A[i][k]`, which makes `J(U) = vec(U) vec(U)† / d`.
//! Maps of channels have unit-trace Choi matrices.

use std::fmt::Write as _;

use num_complex::Complex64 as C64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    eigh, ginibre, haar_unitary, partial_trace, ComplexMatrix, HermitianMatrix, Subsystem, ZERO,
};
use crate::pauli::PauliOperator;

/// Deviation tolerance for unitarity of gate inputs.
pub const UNITARY_TOL: f64 = 1e-10;
/// Tolerance on partial-trace deviations when a map is required to be
/// unital and trace preserving.
pub const UTP_TOL: f64 = 1e-8;

/// Row-major vectorization.
pub fn vectorize(a: &ComplexMatrix) -> Vec<C64> {
    a.as_slice().to_vec()
}

/// Inverse of [`vectorize`].
pub fn unvectorize(v: &[C64], d: usize) -> Result<ComplexMatrix> {
    ComplexMatrix::from_vec(d, d, v.to_vec())
}

fn qubits_of(d: usize) -> Option<usize> {
    d.is_power_of_two().then(|| d.trailing_zeros() as usize)
}

fn require_qubits(d: usize) -> Result<usize> {
    qubits_of(d).ok_or_else(|| Error::InvalidInput(format!("dimension {d} is not a power of two")))
}

fn integer_sqrt(n: usize) -> Option<usize> {
    let r = (n as f64).sqrt().round() as usize;
    (r * r == n).then_some(r)
}

/// Choi matrix of a Hermiticity-preserving map on `d×d` matrices.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChoiMatrix {
    d: usize,
    matrix: HermitianMatrix,
}

impl ChoiMatrix {
    pub fn new(d: usize, matrix: HermitianMatrix) -> Result<Self> {
        if matrix.dim() != d * d {
            return Err(Error::NotPerfectSquare { dim: matrix.dim(), d });
        }
        Ok(Self { d, matrix })
    }

    /// Infers `d` from the matrix size.
    pub fn from_matrix(matrix: HermitianMatrix) -> Result<Self> {
        let d = integer_sqrt(matrix.dim()).ok_or(Error::NotPerfectSquare {
            dim: matrix.dim(),
            d: 0,
        })?;
        Self::new(d, matrix)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> HermitianMatrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    /// `J = Σ_i vec(K_i) vec(K_i)† / d` for `X(ρ) = Σ_i K_i ρ K_i†`.
    pub fn from_kraus(ops: &[ComplexMatrix]) -> Result<Self> {
        let first = ops
            .first()
            .ok_or_else(|| Error::InvalidInput("empty Kraus list".into()))?;
        let d = first.rows();
        let mut m = HermitianMatrix::zeros(d * d);
        for k in ops {
            if k.rows() != d || k.cols() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: k.rows().max(k.cols()),
                });
            }
            m.add_rank_one(1.0 / d as f64, &vectorize(k));
        }
        Self::new(d, m)
    }

    /// Completely depolarizing channel, `J = Id/d²`.
    pub fn depolarizing(d: usize) -> Self {
        let m = HermitianMatrix::identity(d * d).scale(1.0 / (d * d) as f64);
        Self { d, matrix: m }
    }

    pub fn identity_channel(d: usize) -> Self {
        choi_of_unitary(&ComplexMatrix::identity(d)).expect("identity is unitary")
    }

    pub fn zero(d: usize) -> Self {
        Self {
            d,
            matrix: HermitianMatrix::zeros(d * d),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            d: self.d,
            matrix: self.matrix.scale(s),
        }
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &ChoiMatrix, b: f64) -> Result<Self> {
        self.check_same(other)?;
        let mut m = self.matrix.scale(a);
        m.add_scaled(b, &other.matrix);
        Ok(Self { d: self.d, matrix: m })
    }

    fn check_same(&self, other: &ChoiMatrix) -> Result<()> {
        if self.d != other.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                found: other.d,
            });
        }
        Ok(())
    }

    /// `X(M) = d·Tr_2[J (Id ⊗ Mᵀ)]`.
    pub fn apply(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        let d = self.d;
        if m.rows() != d || m.cols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: m.rows(),
            });
        }
        let n = d * d;
        let j = self.matrix.as_matrix().as_slice();
        let mut out = ComplexMatrix::zeros(d, d);
        for i in 0..d {
            for jj in 0..d {
                let mut acc = ZERO;
                for k in 0..d {
                    let row = &j[(i * d + k) * n + jj * d..(i * d + k) * n + jj * d + d];
                    for (l, z) in row.iter().enumerate() {
                        acc += z * m[(k, l)];
                    }
                }
                out[(i, jj)] = acc * d as f64;
            }
        }
        Ok(out)
    }

    /// Hilbert-Schmidt adjoint map, `X†(M)[k][l] = d Σ_{ij} J[(j,l),(i,k)] M[i][j]`.
    pub fn apply_adjoint(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        let d = self.d;
        if m.rows() != d || m.cols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: m.rows(),
            });
        }
        let j = self.matrix.as_matrix();
        let mut out = ComplexMatrix::zeros(d, d);
        for k in 0..d {
            for l in 0..d {
                let mut acc = ZERO;
                for i in 0..d {
                    for jj in 0..d {
                        acc += j[(jj * d + l, i * d + k)] * m[(i, jj)];
                    }
                }
                out[(k, l)] = acc * d as f64;
            }
        }
        Ok(out)
    }

    /// `X(Id) = d·Tr_2 J`.
    pub fn image_of_identity(&self) -> HermitianMatrix {
        partial_trace(&self.matrix, Subsystem::Second, self.d)
            .expect("dimension checked at construction")
            .scale(self.d as f64)
    }

    /// `X†(Id) = d·(Tr_1 J)ᵀ`.
    pub fn adjoint_image_of_identity(&self) -> HermitianMatrix {
        let t = partial_trace(&self.matrix, Subsystem::First, self.d).expect("dimension checked at construction");
        HermitianMatrix::symmetrize(&t.as_matrix().transpose()).scale(self.d as f64)
    }

    /// Largest entrywise deviation of `Tr_1 J` and `Tr_2 J` from `Id/d`.
    pub fn utp_defect(&self) -> f64 {
        let target = ComplexMatrix::identity(self.d).scale_real(1.0 / self.d as f64);
        [Subsystem::First, Subsystem::Second]
            .iter()
            .map(|&s| {
                let t = partial_trace(&self.matrix, s, self.d).expect("dimension checked at construction");
                (t.as_matrix() - &target).max_abs()
            })
            .fold(0.0, f64::max)
    }

    /// Deviation of `Tr_1 J` from `Id/d`.
    pub fn tp_defect(&self) -> f64 {
        let target = ComplexMatrix::identity(self.d).scale_real(1.0 / self.d as f64);
        let t = partial_trace(&self.matrix, Subsystem::First, self.d).expect("dimension checked at construction");
        (t.as_matrix() - &target).max_abs()
    }

    pub fn is_unital_tp(&self, tol: f64) -> bool {
        self.utp_defect() <= tol
    }

    /// Smallest eigenvalue of the Choi matrix.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(eigh(&self.matrix)?.values[0])
    }

    /// `X ↦ V ∘ X ∘ W` for unitary channels `V`, `W`.
    pub fn compose_unitaries(&self, v: &ComplexMatrix, w: &ComplexMatrix) -> Result<Self> {
        // J(V∘X∘W) = (V ⊗ Wᵀ) J (V ⊗ Wᵀ)†
        let k = v.kron(&w.transpose());
        let m = k.matmul(self.matrix.as_matrix()).matmul(&k.adjoint());
        Self::new(self.d, HermitianMatrix::symmetrize(&m))
    }

    /// Text dump: header line `d=<d>`, then one line per matrix row with
    /// interleaved real and imaginary parts.
    pub fn to_csv_string(&self) -> String {
        let mut s = format!("d={}\n", self.d);
        let m = self.matrix.as_matrix();
        for i in 0..m.rows() {
            let fields: Vec<String> = m.row(i).iter().flat_map(|z| [z.re.to_string(), z.im.to_string()]).collect();
            let _ = writeln!(s, "{}", fields.join(","));
        }
        s
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty Choi file".into()))?;
        let d: usize = header
            .trim()
            .strip_prefix("d=")
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| Error::Parse(format!("bad header {header:?}")))?;
        let n = d * d;
        let mut data = Vec::with_capacity(n * n);
        for line in lines {
            let vals: Vec<f64> = line
                .split(',')
                .map(|t| t.trim().parse::<f64>().map_err(|e| Error::Parse(format!("{t:?}: {e}"))))
                .collect::<Result<_>>()?;
            if vals.len() != 2 * n {
                return Err(Error::Parse(format!("expected {} values per row, found {}", 2 * n, vals.len())));
            }
            data.extend(vals.chunks(2).map(|c| C64::new(c[0], c[1])));
        }
        if data.len() != n * n {
            return Err(Error::Parse(format!("expected {n} rows")));
        }
        let m = ComplexMatrix::from_vec(n, n, data)?;
        Self::new(d, HermitianMatrix::new(m)?)
    }
}

/// Choi matrix of `ρ ↦ U ρ U†`.
pub fn choi_of_unitary(u: &ComplexMatrix) -> Result<ChoiMatrix> {
    let dev = u.unitarity_defect();
    if !u.is_square() || dev > UNITARY_TOL {
        return Err(Error::NotUnitary { deviation: dev });
    }
    let d = u.rows();
    let mut m = HermitianMatrix::zeros(d * d);
    m.add_rank_one(1.0 / d as f64, &vectorize(u));
    ChoiMatrix::new(d, m)
}

/// `(X, Y) = Tr(J(X) J(Y))`.
pub fn hs_inner(x: &ChoiMatrix, y: &ChoiMatrix) -> Result<f64> {
    x.check_same(y)?;
    let z = x.matrix.as_matrix().hs_inner(y.matrix.as_matrix());
    debug_assert!(z.im.abs() <= 1e-12 * (1.0 + z.re.abs()));
    Ok(z.re)
}

/// `(U, X) = vec(U)† J(X) vec(U) / d` for a unitary `U`.
pub fn overlap_with_unitary(u: &ComplexMatrix, x: &ChoiMatrix) -> Result<f64> {
    if u.rows() != x.d || u.cols() != x.d {
        return Err(Error::DimensionMismatch {
            expected: x.d,
            found: u.rows(),
        });
    }
    Ok(x.matrix.expectation(u.as_slice()) / x.d as f64)
}

/// Average gate fidelity between the unitary gate `c` and the map `x`, and
/// whether `x` is trace preserving within [`UTP_TOL`].
///
/// Uses `F = (d·(C, X) + Tr X†(Id)/d) / (d + 1)`, which reduces to the usual
/// `(d·(C, X) + 1)/(d + 1)` for trace-preserving maps.
pub fn avg_gate_fidelity_checked(c: &ComplexMatrix, x: &ChoiMatrix) -> Result<(f64, bool)> {
    let dev = c.unitarity_defect();
    if dev > UNITARY_TOL {
        return Err(Error::NotUnitary { deviation: dev });
    }
    let d = x.d as f64;
    let inner = overlap_with_unitary(c, x)?;
    let f = (d * inner + x.trace()) / (d + 1.0);
    Ok((f, x.tp_defect() <= UTP_TOL))
}

pub fn avg_gate_fidelity(c: &ComplexMatrix, x: &ChoiMatrix) -> Result<f64> {
    avg_gate_fidelity_checked(c, x).map(|(f, _)| f)
}

/// Real matrix of a Hermiticity-preserving map in the normalized Pauli
/// basis `P_a = W_a/√d`, `L[a][b] = Tr(P_a X(P_b))`. Index 0 is the identity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiouvilleMatrix {
    d: usize,
    data: Vec<f64>,
}

/// `Tr[J (W_a ⊗ W_bᵀ)]` without forming the Kronecker product.
fn pauli_pair_trace(j: &ComplexMatrix, d: usize, wa: &PauliOperator, wb: &PauliOperator) -> C64 {
    let n = d * d;
    let data = j.as_slice();
    let xb = wb.x_bits() as usize;
    let mut acc = ZERO;
    for i in 0..d {
        let (amp_a, ia) = wa.apply_basis(i);
        for k in 0..d {
            let (amp_b, _) = wb.apply_basis(k ^ xb);
            acc += data[(i * d + k) * n + ia * d + (k ^ xb)] * amp_a * amp_b;
        }
    }
    acc
}

impl LiouvilleMatrix {
    pub fn from_choi(x: &ChoiMatrix) -> Result<Self> {
        let d = x.d;
        let nq = require_qubits(d)?;
        let dd = d * d;
        let paulis: Vec<PauliOperator> = (0..dd).map(|a| PauliOperator::from_index(nq, a)).collect();
        let j = x.matrix.as_matrix();
        let mut data = vec![0.0; dd * dd];
        for (a, wa) in paulis.iter().enumerate() {
            for (b, wb) in paulis.iter().enumerate() {
                // d·Tr[J(P_a ⊗ P_bᵀ)] = Tr[J(W_a ⊗ W_bᵀ)]
                data[a * dd + b] = pauli_pair_trace(j, d, wa, wb).re;
            }
        }
        Ok(Self { d, data })
    }

    /// `J = (1/d²) Σ_ab L[a][b] W_a ⊗ W_bᵀ`.
    pub fn to_choi(&self) -> Result<ChoiMatrix> {
        let d = self.d;
        let nq = require_qubits(d)?;
        let dd = d * d;
        let mut m = ComplexMatrix::zeros(dd, dd);
        let scale = 1.0 / (dd as f64);
        let paulis: Vec<PauliOperator> = (0..dd).map(|a| PauliOperator::from_index(nq, a)).collect();
        for (a, wa) in paulis.iter().enumerate() {
            for (b, wb) in paulis.iter().enumerate() {
                let l = self.data[a * dd + b];
                if l == 0.0 {
                    continue;
                }
                // (W_a ⊗ W_bᵀ)[(i⊕x_a, k⊕x_b), (i, k)] = amp_a(i) amp_b(k⊕x_b)
                let xb = wb.x_bits() as usize;
                for i in 0..d {
                    let (amp_a, ia) = wa.apply_basis(i);
                    for k in 0..d {
                        let (amp_b, _) = wb.apply_basis(k ^ xb);
                        m[(ia * d + (k ^ xb), i * d + k)] += amp_a * amp_b * (l * scale);
                    }
                }
            }
        }
        ChoiMatrix::new(d, HermitianMatrix::symmetrize(&m))
    }

    pub fn from_data(d: usize, data: Vec<f64>) -> Result<Self> {
        require_qubits(d)?;
        let dd = d * d;
        if data.len() != dd * dd {
            return Err(Error::DimensionMismatch {
                expected: dd * dd,
                found: data.len(),
            });
        }
        Ok(Self { d, data })
    }

    pub fn zeros(d: usize) -> Self {
        Self {
            d,
            data: vec![0.0; d * d * d * d],
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Side length `d²`.
    pub fn size(&self) -> usize {
        self.d * self.d
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.data[a * self.size() + b]
    }

    pub fn set(&mut self, a: usize, b: usize, v: f64) {
        let s = self.size();
        self.data[a * s + b] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// `Tr(Lᵀ M)`.
    pub fn inner(&self, other: &LiouvilleMatrix) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn add_scaled(&mut self, s: f64, other: &LiouvilleMatrix) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn sub(&self, other: &LiouvilleMatrix) -> LiouvilleMatrix {
        let mut out = self.clone();
        out.add_scaled(-1.0, other);
        out
    }

    /// Orthogonal projection onto the span of unital trace-preserving maps:
    /// clears row 0 and column 0 except the `(0, 0)` entry.
    pub fn project_utp(&self) -> LiouvilleMatrix {
        let s = self.size();
        let mut out = self.clone();
        for k in 1..s {
            out.data[k] = 0.0;
            out.data[k * s] = 0.0;
        }
        out
    }

    /// Squared Frobenius norm of the block with both indices ≥ 1.
    pub fn unital_block_norm_sqr(&self) -> f64 {
        let s = self.size();
        (1..s)
            .flat_map(|a| (1..s).map(move |b| (a, b)))
            .map(|(a, b)| self.data[a * s + b].powi(2))
            .sum()
    }
}

/// The map `X ↦ P_utp(X)` in Choi form.
pub fn project_utp(x: &ChoiMatrix) -> Result<ChoiMatrix> {
    LiouvilleMatrix::from_choi(x)?.project_utp().to_choi()
}

/// `‖J(X) − J(P_utp X)‖²` from the images of the identity alone.
pub fn utp_deviation_formula(x: &ChoiMatrix) -> f64 {
    let d = x.d as f64;
    let fwd = x.image_of_identity();
    let bwd = x.adjoint_image_of_identity();
    let t = fwd.trace();
    (fwd.frobenius_norm().powi(2) + bwd.frobenius_norm().powi(2) - 2.0 / d * t * t) / d.powi(3)
}

/// Split `H = H₁ + H_c` with `H₁ = λ_max v v†` for the largest algebraic
/// eigenvalue.
pub fn truncate_unit_rank(h: &HermitianMatrix) -> Result<(HermitianMatrix, HermitianMatrix)> {
    let eig = eigh(h)?;
    let n = h.dim();
    if n == 0 {
        return Ok((h.clone(), h.clone()));
    }
    // among equal top eigenvalues take the first reported one
    let top = eig.values[n - 1];
    let idx = eig.values.iter().position(|&v| v == top).unwrap_or(n - 1);
    let mut lead = HermitianMatrix::zeros(n);
    lead.add_rank_one(top, &eig.vector(idx));
    let rest = h - &lead;
    Ok((lead, rest))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KrausTerm {
    pub weight: f64,
    pub operator: ComplexMatrix,
}

/// `X(ρ) = Σ_i λ_i T_i ρ T_i†` with unit-Frobenius `T_i`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KrausDecomposition {
    pub d: usize,
    pub terms: Vec<KrausTerm>,
}

impl KrausDecomposition {
    pub fn to_choi(&self) -> ChoiMatrix {
        let d = self.d;
        let mut m = HermitianMatrix::zeros(d * d);
        for t in &self.terms {
            m.add_rank_one(t.weight / d as f64, t.operator.as_slice());
        }
        ChoiMatrix { d, matrix: m }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Spectral decomposition `d·J = Σ λ_i vec(T_i) vec(T_i)†`; terms with
/// `|λ_i| < tol` are dropped.
pub fn kraus_of_choi(x: &ChoiMatrix, tol: f64) -> Result<KrausDecomposition> {
    let d = x.d;
    let eig = eigh(&x.matrix)?;
    let mut terms = Vec::new();
    for i in (0..eig.values.len()).rev() {
        let lam = eig.values[i] * d as f64;
        if lam.abs() < tol {
            continue;
        }
        terms.push(KrausTerm {
            weight: lam,
            operator: unvectorize(&eig.vector(i), d)?,
        });
    }
    Ok(KrausDecomposition { d, terms })
}

/// Channel `ρ ↦ U ρ U†` with Haar-random `U`.
pub fn random_unitary_channel<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ChoiMatrix {
    choi_of_unitary(&haar_unitary(d, rng)).expect("Haar samples are unitary")
}

/// Random CPTP channel with `rank` Kraus operators taken from the blocks of
/// a Haar-random isometry.
pub fn random_cptp<R: Rng + ?Sized>(d: usize, rank: usize, rng: &mut R) -> ChoiMatrix {
    let big = haar_unitary(d * rank, rng);
    let ops: Vec<ComplexMatrix> = (0..rank)
        .map(|r| ComplexMatrix::from_fn(d, d, |i, j| big[(r * d + i, j)]))
        .collect();
    ChoiMatrix::from_kraus(&ops).expect("non-empty Kraus list")
}

/// Random convex combination of `count` Haar unitary channels; unital and
/// trace preserving.
pub fn random_mixed_unitary<R: Rng + ?Sized>(d: usize, count: usize, rng: &mut R) -> ChoiMatrix {
    let weights: Vec<f64> = (0..count).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = weights.iter().sum();
    let mut acc = ChoiMatrix::zero(d);
    for w in weights {
        let u = random_unitary_channel(d, rng);
        acc = acc.combine(1.0, &u, w / total).expect("same dimension");
    }
    acc
}

/// Hermiticity-preserving map with a Gaussian random Hermitian Choi matrix.
pub fn random_hermiticity_preserving<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ChoiMatrix {
    let g = ginibre(d * d, d * d, rng);
    let h = HermitianMatrix::symmetrize(&g).scale(1.0 / (d * d) as f64);
    ChoiMatrix { d, matrix: h }
}

/// `p·U + (1 − p)·depolarizing`.
pub fn unitary_depolarizing_mixture(u: &ComplexMatrix, p: f64) -> Result<ChoiMatrix> {
    let cu = choi_of_unitary(u)?;
    cu.combine(p, &ChoiMatrix::depolarizing(cu.d), 1.0 - p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_entangled, SeedStream};

    #[test]
    fn identity_channel_is_bell_projector() {
        let j = ChoiMatrix::identity_channel(2);
        let want = HermitianMatrix::projector(&max_entangled(2));
        assert!((j.matrix().as_matrix() - want.as_matrix()).max_abs() < 1e-15);
    }

    #[test]
    fn unitary_choi_properties() {
        let mut rng = SeedStream::new(2, 0).rng();
        for d in [2, 3, 4] {
            let u = haar_unitary(d, &mut rng);
            let j = choi_of_unitary(&u).unwrap();
            assert!((j.trace() - 1.0).abs() < 1e-12);
            assert!(j.utp_defect() < 1e-12);
            let eig = eigh(j.matrix()).unwrap();
            assert!((eig.values[d * d - 1] - 1.0).abs() < 1e-12);
            assert!(eig.values[..d * d - 1].iter().all(|v| v.abs() < 1e-12));
        }
        let bad = ComplexMatrix::identity(2).scale_real(1.1);
        assert!(matches!(choi_of_unitary(&bad), Err(Error::NotUnitary { .. })));
    }

    #[test]
    fn apply_matches_kraus_action() {
        let mut rng = SeedStream::new(3, 0).rng();
        let u = haar_unitary(3, &mut rng);
        let j = choi_of_unitary(&u).unwrap();
        let rho = ginibre(3, 3, &mut rng);
        let out = j.apply(&rho).unwrap();
        let want = u.matmul(&rho).matmul(&u.adjoint());
        assert!((&out - &want).max_abs() < 1e-12);
        let back = j.apply_adjoint(&rho).unwrap();
        let want = u.adjoint().matmul(&rho).matmul(&u);
        assert!((&back - &want).max_abs() < 1e-12);
    }

    #[test]
    fn liouville_round_trip_and_inner_product() {
        let mut rng = SeedStream::new(4, 0).rng();
        for d in [2, 4] {
            let x = random_hermiticity_preserving(d, &mut rng);
            let y = random_cptp(d, 2, &mut rng);
            let lx = LiouvilleMatrix::from_choi(&x).unwrap();
            let ly = LiouvilleMatrix::from_choi(&y).unwrap();
            let back = lx.to_choi().unwrap();
            assert!((back.matrix().as_matrix() - x.matrix().as_matrix()).max_abs() < 1e-12);
            let lhs = hs_inner(&x, &y).unwrap();
            let rhs = lx.inner(&ly) / (d * d) as f64;
            assert!((lhs - rhs).abs() < 1e-10);
        }
    }

    #[test]
    fn liouville_of_identity_channel() {
        let l = LiouvilleMatrix::from_choi(&ChoiMatrix::identity_channel(4)).unwrap();
        for a in 0..16 {
            for b in 0..16 {
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((l.get(a, b) - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn depolarizing_inner_products() {
        let mut rng = SeedStream::new(5, 0).rng();
        let u = haar_unitary(2, &mut rng);
        let cu = choi_of_unitary(&u).unwrap();
        assert!((hs_inner(&cu, &cu).unwrap() - 1.0).abs() < 1e-12);
        let dep = ChoiMatrix::depolarizing(2);
        assert!((hs_inner(&cu, &dep).unwrap() - 0.25).abs() < 1e-12);
        assert!((avg_gate_fidelity(&u, &dep).unwrap() - 0.5).abs() < 1e-12);
        assert!((avg_gate_fidelity(&u, &cu).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn non_tp_input_is_flagged() {
        let j = ChoiMatrix::identity_channel(2).scale(0.5);
        let (_, tp) = avg_gate_fidelity_checked(&ComplexMatrix::identity(2), &j).unwrap();
        assert!(!tp);
    }

    #[test]
    fn projection_properties() {
        let mut rng = SeedStream::new(6, 0).rng();
        let x = random_hermiticity_preserving(2, &mut rng);
        let y = random_hermiticity_preserving(2, &mut rng);
        let lx = LiouvilleMatrix::from_choi(&x).unwrap();
        let ly = LiouvilleMatrix::from_choi(&y).unwrap();
        let p = lx.project_utp();
        assert!(p.project_utp().sub(&p).frobenius_norm() < 1e-14);
        assert!((p.inner(&ly) - lx.inner(&ly.project_utp())).abs() < 1e-12);
        let dev = lx.sub(&p).frobenius_norm().powi(2) / 4.0;
        assert!((dev - utp_deviation_formula(&x)).abs() < 1e-12);
        // projection of the unital TP channels is the identity
        let dep = LiouvilleMatrix::from_choi(&ChoiMatrix::depolarizing(2)).unwrap();
        assert!(dep.project_utp().sub(&dep).frobenius_norm() < 1e-14);
    }

    #[test]
    fn truncation_cases() {
        let id = HermitianMatrix::identity(4);
        let (lead, rest) = truncate_unit_rank(&id).unwrap();
        assert!((lead.trace() - 1.0).abs() < 1e-12);
        let rest_eig = eigh(&rest).unwrap();
        assert!((rest_eig.values.iter().map(|v| v.abs()).sum::<f64>() - 3.0).abs() < 1e-12);
        let p = HermitianMatrix::projector(&max_entangled(2));
        let (_, rest) = truncate_unit_rank(&p).unwrap();
        assert!(rest.frobenius_norm() < 1e-12);
    }

    #[test]
    fn kraus_round_trips() {
        let mut rng = SeedStream::new(7, 0).rng();
        let u = haar_unitary(2, &mut rng);
        let k = kraus_of_choi(&choi_of_unitary(&u).unwrap(), 1e-10).unwrap();
        assert_eq!(k.len(), 1);
        assert!((k.terms[0].weight - 2.0).abs() < 1e-10);
        let dep = ChoiMatrix::depolarizing(2);
        let k = kraus_of_choi(&dep, 1e-10).unwrap();
        assert_eq!(k.len(), 4);
        assert!(k.terms.iter().all(|t| (t.weight - 0.5).abs() < 1e-12));
        let back = k.to_choi();
        assert!((back.matrix().as_matrix() - dep.matrix().as_matrix()).max_abs() < 1e-12);
        let x = random_cptp(4, 3, &mut rng);
        let k = kraus_of_choi(&x, 1e-10).unwrap();
        assert_eq!(k.len(), 3);
        assert!((k.to_choi().matrix().as_matrix() - x.matrix().as_matrix()).max_abs() < 1e-10);
    }

    #[test]
    fn csv_round_trip() {
        let mut rng = SeedStream::new(8, 0).rng();
        let x = random_cptp(2, 2, &mut rng);
        let text = x.to_csv_string();
        assert!(text.starts_with("d=2\n"));
        let back = ChoiMatrix::from_csv_str(&text).unwrap();
        assert_eq!(back.matrix().as_matrix(), x.matrix().as_matrix());
    }
}
