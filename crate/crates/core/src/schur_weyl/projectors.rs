use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, HermitianMatrix};
use crate::pauli::{pauli_basis, PauliOperator};

use super::partition::{CharacterTable, Partition};
use super::permutation::{tensor_dim, SymmetricGroup};

/// Largest qubit count for the dense stabilizer projector on four copies.
pub const Q_MAX_QUBITS: usize = 2;
/// Largest qubit count for the Pauli expansion of the flip operator.
pub const FLIP_MAX_QUBITS: usize = 3;

/// Isotypic data for one partition acting on `(C^d)^{⊗k}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IrrepData {
    pub lambda: Partition,
    /// Specht dimension.
    pub d_lambda: usize,
    /// Weyl module dimension `Tr(P_λ)/d_λ`.
    pub weyl_dim: f64,
    /// `Tr(Q P_λ)/d_λ`, set for `k = 4` on qubits when `Q` is available.
    pub weyl_dim_plus: Option<f64>,
    /// `Tr((Id − Q) P_λ)/d_λ`.
    pub weyl_dim_minus: Option<f64>,
    pub projector: HermitianMatrix,
}

/// Group-algebra coefficients `(d_λ/k!) χ^λ(σ)` of the central idempotent.
pub fn central_idempotent(group: &SymmetricGroup, table: &CharacterTable, lambda: &Partition) -> Result<Vec<C64>> {
    let k = group.degree();
    if table.k != k || lambda.size() != k {
        return Err(Error::InvalidInput(format!("partition {lambda} does not match S_{k}")));
    }
    let fact = group.order() as f64;
    let dl = lambda.specht_dim() as f64;
    group
        .elements()
        .iter()
        .map(|s| Ok(C64::new(dl / fact * table.value(lambda, &s.cycle_type())? as f64, 0.0)))
        .collect()
}

/// Young projector `P_λ = (d_λ/k!) Σ_σ χ^λ(σ) π(σ)` from the built-in
/// character table.
pub fn young_projector(lambda: &Partition, d: usize) -> Result<IrrepData> {
    let table = CharacterTable::standard(lambda.size())?;
    young_projector_with(&table, lambda, d)
}

/// As [`young_projector`] with an explicit character table.
pub fn young_projector_with(table: &CharacterTable, lambda: &Partition, d: usize) -> Result<IrrepData> {
    let k = lambda.size();
    if lambda.len() > d {
        return Err(Error::InvalidInput(format!("partition {lambda} has more than {d} rows")));
    }
    tensor_dim(d, k)?;
    let group = SymmetricGroup::new(k);
    let coeffs = central_idempotent(&group, table, lambda)?;
    let projector = HermitianMatrix::symmetrize(&group.materialize(&coeffs, d)?);
    let d_lambda = lambda.specht_dim();
    let weyl_dim = projector.trace() / d_lambda as f64;
    let (weyl_dim_plus, weyl_dim_minus) = match (k, d.is_power_of_two()) {
        (4, true) if d.trailing_zeros() as usize <= Q_MAX_QUBITS => {
            let q = q_projector(d.trailing_zeros() as usize)?;
            let plus = q.as_matrix().trace_of_product(projector.as_matrix()).re / d_lambda as f64;
            (Some(plus), Some(weyl_dim - plus))
        }
        _ => (None, None),
    };
    Ok(IrrepData {
        lambda: lambda.clone(),
        d_lambda,
        weyl_dim,
        weyl_dim_plus,
        weyl_dim_minus,
        projector,
    })
}

/// `W^{⊗k}` as a monomial matrix added into `out` with weight `w`.
pub(crate) fn add_pauli_tensor_power(out: &mut ComplexMatrix, p: &PauliOperator, k: usize, w: C64) {
    let d = 1usize << p.num_qubits();
    let dim = out.rows();
    for c in 0..dim {
        let mut amp = w;
        let mut row = 0usize;
        let mut rem = c;
        let mut place = 1usize;
        for _ in 0..k {
            let (a, r) = p.apply_basis(rem % d);
            amp *= a;
            row += r * place;
            rem /= d;
            place *= d;
        }
        out[(row, c)] += amp;
    }
}

/// Stabilizer projector `Q = d^{-2} Σ_W W^{⊗4}` on four copies of `n` qubits.
pub fn q_projector(n: usize) -> Result<HermitianMatrix> {
    if n > Q_MAX_QUBITS {
        return Err(Error::SizeCap {
            what: "stabilizer projector qubits",
            limit: Q_MAX_QUBITS,
            requested: n,
        });
    }
    let d = 1usize << n;
    let dim = d.pow(4);
    let mut q = ComplexMatrix::zeros(dim, dim);
    let w = C64::new(1.0 / (d * d) as f64, 0.0);
    for p in pauli_basis(n) {
        add_pauli_tensor_power(&mut q, &p, 4, w);
    }
    Ok(HermitianMatrix::symmetrize(&q))
}

/// `d^{-1} Σ_W W ⊗ W` on two copies of `n` qubits; equals the flip operator.
pub fn flip_from_paulis(n: usize) -> Result<HermitianMatrix> {
    if n > FLIP_MAX_QUBITS {
        return Err(Error::SizeCap {
            what: "flip expansion qubits",
            limit: FLIP_MAX_QUBITS,
            requested: n,
        });
    }
    let d = 1usize << n;
    let mut f = ComplexMatrix::zeros(d * d, d * d);
    let w = C64::new(1.0 / d as f64, 0.0);
    for p in pauli_basis(n) {
        add_pauli_tensor_power(&mut f, &p, 2, w);
    }
    Ok(HermitianMatrix::symmetrize(&f))
}

/// `‖Q (T₁ ⊗ T₂ ⊗ T₃ ⊗ T₄) Q‖_F` for operators on `n` qubits.
pub fn q_sandwich_norm(n: usize, factors: &[ComplexMatrix; 4]) -> Result<f64> {
    let d = 1usize << n;
    for t in factors {
        if t.rows() != d || t.cols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: t.rows().max(t.cols()),
            });
        }
    }
    let q = q_projector(n)?;
    let t = factors[0].kron(&factors[1]).kron(&factors[2]).kron(&factors[3]);
    Ok(q.as_matrix().matmul(&t).matmul(q.as_matrix()).frobenius_norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schur_weyl::partitions;
    use crate::schur_weyl::permutation::{perm_operator, Permutation};

    #[test]
    fn symmetric_subspace_two_qubits() {
        let irr = young_projector(&Partition::new(vec![2]).unwrap(), 2).unwrap();
        assert_eq!(irr.d_lambda, 1);
        assert!((irr.weyl_dim - 3.0).abs() < 1e-12);
    }

    #[test]
    fn symmetrizer_dimension_at_d4() {
        let irr = young_projector(&Partition::new(vec![4]).unwrap(), 4).unwrap();
        assert!((irr.weyl_dim - 35.0).abs() < 1e-10);
    }

    #[test]
    fn completeness_and_orthogonality() {
        for (k, d) in [(2, 2), (3, 2), (4, 2), (3, 3)] {
            let irreps: Vec<IrrepData> = partitions(k, d).iter().map(|l| young_projector(l, d).unwrap()).collect();
            let dim = d.pow(k as u32);
            let mut sum = ComplexMatrix::zeros(dim, dim);
            let mut total = 0.0;
            for a in &irreps {
                sum += a.projector.as_matrix();
                total += a.d_lambda as f64 * a.weyl_dim;
                for b in &irreps {
                    let prod = a.projector.as_matrix().matmul(b.projector.as_matrix());
                    let want = if a.lambda == b.lambda {
                        a.projector.as_matrix().clone()
                    } else {
                        ComplexMatrix::zeros(dim, dim)
                    };
                    assert!((&prod - &want).max_abs() < 1e-12);
                }
            }
            assert!((&sum - &ComplexMatrix::identity(dim)).max_abs() < 1e-12);
            assert!((total - dim as f64).abs() < 1e-10);
        }
    }

    #[test]
    fn q_is_a_projector_commuting_with_permutations() {
        for n in 1..=2 {
            let q = q_projector(n).unwrap();
            let d = 1usize << n;
            assert!((q.trace() - (d * d) as f64).abs() < 1e-10);
            let qm = q.as_matrix();
            assert!((&qm.matmul(qm) - qm).max_abs() < 1e-12);
            for s in SymmetricGroup::new(4).elements() {
                let p = perm_operator(s, d).unwrap();
                assert!((&qm.matmul(&p) - &p.matmul(qm)).frobenius_norm() < 1e-10);
            }
        }
        assert!(q_projector(3).is_err());
    }

    #[test]
    fn flip_expansion() {
        for n in 1..=3 {
            let d = 1usize << n;
            let f = flip_from_paulis(n).unwrap();
            let swap = perm_operator(&Permutation::transposition(2, 0, 1), d).unwrap();
            assert!((f.as_matrix() - &swap).max_abs() < 1e-12);
            assert!((f.trace() - d as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn split_dimensions_add_up() {
        for lam in partitions(4, 2) {
            let irr = young_projector(&lam, 2).unwrap();
            let (p, m) = (irr.weyl_dim_plus.unwrap(), irr.weyl_dim_minus.unwrap());
            assert!((p + m - irr.weyl_dim).abs() < 1e-12);
            assert!(p > -1e-9 && m > -1e-9);
        }
    }

    #[test]
    fn row_constraint() {
        assert!(young_projector(&Partition::new(vec![1, 1, 1]).unwrap(), 2).is_err());
    }
}
