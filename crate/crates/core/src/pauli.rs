//! Multi-qubit Pauli operators.
//!
//! Qubit `q` is bit `q` of a computational-basis index. The operator with
//! bit strings `(x, z)` is `⊗_q i^{x_q z_q} X^{x_q} Z^{z_q}`, so `(1, 1)` is
//! exactly `Y` and every phase-free operator is Hermitian.

use std::fmt;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

/// Largest qubit count for dense Pauli matrices.
pub const PAULI_DENSE_MAX_QUBITS: usize = 6;

/// Powers of `i`.
const I_POW: [C64; 4] = [
    C64::new(1.0, 0.0),
    C64::new(0.0, 1.0),
    C64::new(-1.0, 0.0),
    C64::new(0.0, -1.0),
];

pub(crate) fn i_pow(k: u32) -> C64 {
    I_POW[(k & 3) as usize]
}

/// Pauli operator `i^phase · W(x, z)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliOperator {
    n: usize,
    x: u64,
    z: u64,
    phase: u8,
}

impl PauliOperator {
    pub fn new(n: usize, x: u64, z: u64, phase: u8) -> Result<Self> {
        if n > 32 {
            return Err(Error::InvalidInput(format!("{n} qubits exceed the bit-string width")));
        }
        let mask = (1u64 << n) - 1;
        if x & !mask != 0 || z & !mask != 0 {
            return Err(Error::InvalidInput(format!("bit strings exceed {n} qubits")));
        }
        Ok(Self {
            n,
            x,
            z,
            phase: phase & 3,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self { n, x: 0, z: 0, phase: 0 }
    }

    /// Phase-free operator with basis index `a = x | (z << n)`.
    pub fn from_index(n: usize, a: usize) -> Self {
        let mask = (1u64 << n) - 1;
        let a = a as u64;
        Self {
            n,
            x: a & mask,
            z: (a >> n) & mask,
            phase: 0,
        }
    }

    /// Basis index `x | (z << n)`, ignoring the phase.
    pub fn index(&self) -> usize {
        (self.x | (self.z << self.n)) as usize
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn x_bits(&self) -> u64 {
        self.x
    }

    pub fn z_bits(&self) -> u64 {
        self.z
    }

    /// Exponent `k` of the prefactor `i^k`.
    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn with_phase(mut self, phase: u8) -> Self {
        self.phase = phase & 3;
        self
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn is_hermitian(&self) -> bool {
        self.phase.is_multiple_of(2)
    }

    /// Number of non-identity tensor factors.
    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    pub fn commutes_with(&self, other: &PauliOperator) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()).is_multiple_of(2)
    }

    /// Operator product `self · other` with exact phase.
    pub fn mul(&self, other: &PauliOperator) -> PauliOperator {
        assert_eq!(self.n, other.n, "qubit count mismatch");
        let x = self.x ^ other.x;
        let z = self.z ^ other.z;
        // i^{x1z1} X^{x1}Z^{z1} i^{x2z2} X^{x2}Z^{z2}
        //   = i^{x1z1 + x2z2 + 2 z1x2} X^{x}Z^{z}, and X^xZ^z = i^{-xz} W(x,z)
        let e = (self.x & self.z).count_ones()
            + (other.x & other.z).count_ones()
            + 2 * (self.z & other.x).count_ones()
            + 4
            - ((x & z).count_ones() & 3);
        PauliOperator {
            n: self.n,
            x,
            z,
            phase: ((self.phase as u32 + other.phase as u32 + e) & 3) as u8,
        }
    }

    /// Image of basis state `|j⟩` as `(amplitude, target index)`.
    pub fn apply_basis(&self, j: usize) -> (C64, usize) {
        let j = j as u64;
        let k = self.phase as u32 + (self.x & self.z).count_ones() + 2 * (self.z & j).count_ones();
        (i_pow(k), (j ^ self.x) as usize)
    }

    /// Dense `2^n × 2^n` matrix.
    pub fn dense(&self) -> Result<ComplexMatrix> {
        if self.n > PAULI_DENSE_MAX_QUBITS {
            return Err(Error::SizeCap {
                what: "dense Pauli operator qubits",
                limit: PAULI_DENSE_MAX_QUBITS,
                requested: self.n,
            });
        }
        let d = 1usize << self.n;
        let mut m = ComplexMatrix::zeros(d, d);
        for j in 0..d {
            let (amp, i) = self.apply_basis(j);
            m[(i, j)] = amp;
        }
        Ok(m)
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = ["+", "+i", "-", "-i"][self.phase as usize];
        write!(f, "{sign}")?;
        for q in (0..self.n).rev() {
            let c = match ((self.x >> q) & 1, (self.z >> q) & 1) {
                (0, 0) => 'I',
                (1, 0) => 'X',
                (1, 1) => 'Y',
                _ => 'Z',
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Dense matrix of a Pauli operator.
pub fn pauli_dense(p: &PauliOperator) -> Result<ComplexMatrix> {
    p.dense()
}

/// All `4^n` phase-free Paulis in basis-index order.
pub fn pauli_basis(n: usize) -> impl Iterator<Item = PauliOperator> {
    (0..1usize << (2 * n)).map(move |a| PauliOperator::from_index(n, a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn y() -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(2, 2);
        m[(0, 1)] = C64::new(0.0, -1.0);
        m[(1, 0)] = C64::new(0.0, 1.0);
        m
    }

    #[test]
    fn single_qubit_matrices() {
        let id = PauliOperator::from_index(1, 0).dense().unwrap();
        assert!((&id - &ComplexMatrix::identity(2)).max_abs() == 0.0);
        let yy = PauliOperator::new(1, 1, 1, 0).unwrap().dense().unwrap();
        assert!((&yy - &y()).max_abs() < 1e-15);
    }

    #[test]
    fn two_qubit_orthogonality() {
        let ws: Vec<_> = pauli_basis(2).map(|p| p.dense().unwrap()).collect();
        for (j, a) in ws.iter().enumerate() {
            assert!(a.hermiticity_defect() == 0.0);
            assert!(a.is_unitary(1e-14));
            for (k, b) in ws.iter().enumerate() {
                let t = a.trace_of_product(b);
                let want = if j == k { 4.0 } else { 0.0 };
                assert!((t - C64::new(want, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn tensor_structure() {
        // qubit 0 is the least significant index, so it is the right factor
        let x0 = PauliOperator::new(2, 0b01, 0, 0).unwrap().dense().unwrap();
        let xm = PauliOperator::new(1, 1, 0, 0).unwrap().dense().unwrap();
        let expected = ComplexMatrix::identity(2).kron(&xm);
        assert!((&x0 - &expected).max_abs() == 0.0);
    }

    #[test]
    fn too_many_qubits() {
        assert!(PauliOperator::identity(7).dense().is_err());
    }

    proptest! {
        #[test]
        fn product_matches_dense(a in 0usize..64, b in 0usize..64, pa in 0u8..4, pb in 0u8..4) {
            let p = PauliOperator::from_index(3, a).with_phase(pa);
            let q = PauliOperator::from_index(3, b).with_phase(pb);
            let prod = p.mul(&q).dense().unwrap();
            let dense = p.dense().unwrap().matmul(&q.dense().unwrap());
            prop_assert!((&prod - &dense).max_abs() < 1e-14);
        }

        #[test]
        fn commutation_matches_dense(a in 0usize..64, b in 0usize..64) {
            let p = PauliOperator::from_index(3, a);
            let q = PauliOperator::from_index(3, b);
            let (pd, qd) = (p.dense().unwrap(), q.dense().unwrap());
            let comm = &pd.matmul(&qd) - &qd.matmul(&pd);
            prop_assert_eq!(p.commutes_with(&q), comm.max_abs() < 1e-14);
        }
    }
}
