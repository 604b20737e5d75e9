//! Clifford unitaries as binary symplectic tableaux.
//!
//! Row `j < n` holds the image of `X_j` and row `n + j` the image of `Z_j`
//! under conjugation `P ↦ U P U†`. A row is a `2n`-bit mask with the x part
//! in bits `0..n` and the z part in bits `n..2n`. Phase bit `r_j` gives the
//! image sign `(-1)^{r_j}`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_complex::Complex64 as C64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, ZERO};
use crate::pauli::PauliOperator;

/// Largest qubit count for tableau sampling.
pub const SAMPLE_MAX_QUBITS: usize = 6;
/// Largest qubit count for dense unitary synthesis.
pub const UNITARY_MAX_QUBITS: usize = 5;
/// Largest qubit count for full enumeration.
pub const ENUMERATE_MAX_QUBITS: usize = 2;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CliffordTableau {
    n: usize,
    rows: Vec<u64>,
    phases: u64,
}

fn symplectic_product(a: u64, b: u64, n: usize) -> u32 {
    let mask = (1u64 << n) - 1;
    let (ax, az) = (a & mask, a >> n);
    let (bx, bz) = (b & mask, b >> n);
    ((ax & bz).count_ones() + (az & bx).count_ones()) & 1
}

impl CliffordTableau {
    /// Validates the symplectic condition.
    pub fn new(n: usize, rows: Vec<u64>, phases: u64) -> Result<Self> {
        if n == 0 || n > 16 {
            return Err(Error::InvalidTableau(format!("unsupported qubit count {n}")));
        }
        if rows.len() != 2 * n {
            return Err(Error::InvalidTableau(format!(
                "expected {} rows, found {}",
                2 * n,
                rows.len()
            )));
        }
        let width_mask = (1u64 << (2 * n)) - 1;
        if rows.iter().any(|r| r & !width_mask != 0) || phases & !width_mask != 0 {
            return Err(Error::InvalidTableau("bits outside the tableau width".into()));
        }
        let t = Self { n, rows, phases };
        t.check_symplectic()?;
        Ok(t)
    }

    pub fn identity(n: usize) -> Self {
        let rows = (0..2 * n).map(|j| 1u64 << j).collect();
        Self { n, rows, phases: 0 }
    }

    /// Single-qubit Hadamard: `X ↔ Z`.
    pub fn hadamard() -> Self {
        Self {
            n: 1,
            rows: vec![0b10, 0b01],
            phases: 0,
        }
    }

    /// Single-qubit phase gate: `X ↦ Y`, `Z ↦ Z`.
    pub fn phase_gate() -> Self {
        Self {
            n: 1,
            rows: vec![0b11, 0b10],
            phases: 0,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> &[u64] {
        &self.rows
    }

    pub fn phase_bits(&self) -> u64 {
        self.phases
    }

    fn check_symplectic(&self) -> Result<()> {
        let n = self.n;
        for i in 0..2 * n {
            for j in 0..2 * n {
                let want = u32::from(i + n == j || j + n == i);
                if symplectic_product(self.rows[i], self.rows[j], n) != want {
                    return Err(Error::InvalidTableau(format!(
                        "rows {i} and {j} violate the symplectic condition"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn is_symplectic(&self) -> bool {
        self.check_symplectic().is_ok()
    }

    /// Signed image of generator `j` (`X_j` for `j < n`, `Z_{j-n}` otherwise).
    pub fn generator_image(&self, j: usize) -> PauliOperator {
        let n = self.n;
        let mask = (1u64 << n) - 1;
        let r = self.rows[j];
        let sign = ((self.phases >> j) & 1) as u8;
        PauliOperator::new(n, r & mask, r >> n, 2 * sign).expect("row fits the qubit count")
    }

    /// `U P U†` computed from the tableau.
    pub fn conjugate_pauli(&self, p: &PauliOperator) -> PauliOperator {
        let n = self.n;
        assert_eq!(p.num_qubits(), n, "qubit count mismatch");
        // P = i^{phase + x·z} (Π X_q^{x_q}) (Π Z_q^{z_q})
        let k = p.phase() as u32 + (p.x_bits() & p.z_bits()).count_ones();
        let mut acc = PauliOperator::identity(n).with_phase((k & 3) as u8);
        for q in 0..n {
            if (p.x_bits() >> q) & 1 == 1 {
                acc = acc.mul(&self.generator_image(q));
            }
        }
        for q in 0..n {
            if (p.z_bits() >> q) & 1 == 1 {
                acc = acc.mul(&self.generator_image(n + q));
            }
        }
        acc
    }

    /// Dense unitary realizing the tableau; the global phase is fixed so that
    /// the first nonzero entry in row-major order is real and positive.
    pub fn to_unitary(&self) -> Result<ComplexMatrix> {
        let n = self.n;
        if n > UNITARY_MAX_QUBITS {
            return Err(Error::SizeCap {
                what: "dense Clifford synthesis qubits",
                limit: UNITARY_MAX_QUBITS,
                requested: n,
            });
        }
        self.check_symplectic()?;
        let d = 1usize << n;
        let x_images: Vec<PauliOperator> = (0..n).map(|q| self.generator_image(q)).collect();
        let z_images: Vec<PauliOperator> = (0..n).map(|q| self.generator_image(n + q)).collect();

        // U|0⟩ spans the joint +1 eigenspace of the Z images; project basis
        // vectors onto it until one survives.
        let mut psi0 = None;
        for start in 0..d {
            let mut v = vec![ZERO; d];
            v[start] = C64::new(1.0, 0.0);
            for g in &z_images {
                let gv = apply_pauli(g, &v);
                for (a, b) in v.iter_mut().zip(gv) {
                    *a = (*a + b) * 0.5;
                }
            }
            let norm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            if norm2 >= 0.5 / d as f64 {
                let s = 1.0 / norm2.sqrt();
                v.iter_mut().for_each(|z| *z *= s);
                psi0 = Some(v);
                break;
            }
        }
        let psi0 = psi0.ok_or_else(|| Error::InvalidTableau("stabilizer images have no common eigenvector".into()))?;

        // Column x is (Π_q a_q^{x_q}) U|0⟩, built by sweeping Gray-style from
        // the column with one bit fewer.
        let mut cols: Vec<Vec<C64>> = vec![Vec::new(); d];
        cols[0] = psi0;
        for x in 1..d {
            let q = x.trailing_zeros() as usize;
            let prev = x & !(1 << q);
            cols[x] = apply_pauli(&x_images[q], &cols[prev]);
        }
        let mut u = ComplexMatrix::from_fn(d, d, |i, j| cols[j][i]);
        if let Some(&z) = u.as_slice().iter().find(|z| z.norm() > 1e-12) {
            let phase = z.conj() / z.norm();
            u.as_mut_slice().iter_mut().for_each(|w| *w *= phase);
        }
        Ok(u)
    }

    /// `n;rows-bits;phase-bits`, rows of the `2n×2n` binary matrix in order,
    /// each row listing x bits then z bits.
    pub fn serialize(&self) -> String {
        self.to_string()
    }
}

fn apply_pauli(p: &PauliOperator, v: &[C64]) -> Vec<C64> {
    let mut out = vec![ZERO; v.len()];
    for (j, &a) in v.iter().enumerate() {
        if a != ZERO {
            let (amp, i) = p.apply_basis(j);
            out[i] += amp * a;
        }
    }
    out
}

impl fmt::Display for CliffordTableau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = 2 * self.n;
        write!(f, "{};", self.n)?;
        for r in &self.rows {
            for b in 0..w {
                f.write_str(if (r >> b) & 1 == 1 { "1" } else { "0" })?;
            }
        }
        f.write_str(";")?;
        for b in 0..w {
            f.write_str(if (self.phases >> b) & 1 == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for CliffordTableau {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(';').collect();
        if parts.len() != 3 {
            return Err(Error::Parse(format!("expected 3 fields in tableau string {s:?}")));
        }
        let n: usize = parts[0]
            .parse()
            .map_err(|_| Error::Parse(format!("bad qubit count {:?}", parts[0])))?;
        if n == 0 || n > 16 {
            return Err(Error::Parse(format!("unsupported qubit count {n}")));
        }
        let w = 2 * n;
        let bits = |text: &str, len: usize| -> Result<Vec<bool>> {
            if text.len() != len {
                return Err(Error::Parse(format!("expected {len} bits, found {}", text.len())));
            }
            text.chars()
                .map(|c| match c {
                    '0' => Ok(false),
                    '1' => Ok(true),
                    _ => Err(Error::Parse(format!("invalid bit {c:?}"))),
                })
                .collect()
        };
        let sbits = bits(parts[1], w * w)?;
        let pbits = bits(parts[2], w)?;
        let rows = sbits
            .chunks(w)
            .map(|ch| ch.iter().enumerate().fold(0u64, |acc, (b, &on)| acc | (u64::from(on) << b)))
            .collect();
        let phases = pbits.iter().enumerate().fold(0u64, |acc, (b, &on)| acc | (u64::from(on) << b));
        CliffordTableau::new(n, rows, phases)
    }
}

impl Serialize for CliffordTableau {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for CliffordTableau {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Reduces `vectors` to a basis of their span.
fn span_basis(vectors: &[u64]) -> Vec<u64> {
    let mut basis: Vec<u64> = Vec::new();
    for &v in vectors {
        let mut r = v;
        for &b in &basis {
            let pivot = 63 - b.leading_zeros();
            if (r >> pivot) & 1 == 1 {
                r ^= b;
            }
        }
        if r != 0 {
            // keep basis sorted by decreasing pivot so reduction stays valid
            let pos = basis
                .iter()
                .position(|b| b.leading_zeros() > r.leading_zeros())
                .unwrap_or(basis.len());
            for b in basis.iter_mut() {
                let p = 63 - r.leading_zeros();
                if (*b >> p) & 1 == 1 {
                    *b ^= r;
                }
            }
            basis.insert(pos, r);
        }
    }
    basis
}

fn random_combination<R: Rng + ?Sized>(basis: &[u64], rng: &mut R) -> u64 {
    let coeffs: u64 = rng.random::<u64>();
    basis
        .iter()
        .enumerate()
        .filter(|(i, _)| (coeffs >> i) & 1 == 1)
        .fold(0, |acc, (_, b)| acc ^ b)
}

/// Uniformly random Clifford (modulo global phase) on `n` qubits.
///
/// Generator pairs are drawn one at a time: the image of `X_q` is a uniform
/// nonzero vector in the symplectic complement of the pairs already fixed,
/// the image of `Z_q` is uniform among complement vectors pairing to one
/// with it. Each symplectic matrix is therefore equally likely, and the sign
/// bits are uniform and independent.
pub fn sample_clifford<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<CliffordTableau> {
    if n == 0 || n > SAMPLE_MAX_QUBITS {
        return Err(Error::SizeCap {
            what: "Clifford sampling qubits",
            limit: SAMPLE_MAX_QUBITS,
            requested: n,
        });
    }
    let mut complement: Vec<u64> = (0..2 * n).map(|j| 1u64 << j).collect();
    let mut rows = vec![0u64; 2 * n];
    for q in 0..n {
        let v = loop {
            let v = random_combination(&complement, rng);
            if v != 0 {
                break v;
            }
        };
        let w = loop {
            let w = random_combination(&complement, rng);
            if symplectic_product(v, w, n) == 1 {
                break w;
            }
        };
        rows[q] = v;
        rows[n + q] = w;
        let projected: Vec<u64> = complement
            .iter()
            .map(|&b| {
                let mut r = b;
                if symplectic_product(b, w, n) == 1 {
                    r ^= v;
                }
                if symplectic_product(b, v, n) == 1 {
                    r ^= w;
                }
                r
            })
            .collect();
        complement = span_basis(&projected);
        debug_assert_eq!(complement.len(), 2 * (n - q - 1));
    }
    let phases = rng.random::<u64>() & ((1u64 << (2 * n)) - 1);
    Ok(CliffordTableau { n, rows, phases })
}

/// `|Cl(2^n)| / U(1) = 2^{n²+2n} Π_{j=1}^{n} (4^j − 1)`.
pub fn clifford_cardinality(n: usize) -> BigUint {
    let mut acc = BigUint::from(1u32) << (n * n + 2 * n);
    for j in 1..=n {
        acc *= (BigUint::from(1u32) << (2 * j)) - BigUint::from(1u32);
    }
    acc
}

/// Every Clifford tableau on `n ≤ 2` qubits, in lexicographic order.
pub fn enumerate_cliffords(n: usize) -> Result<Vec<CliffordTableau>> {
    if n == 0 || n > ENUMERATE_MAX_QUBITS {
        return Err(Error::SizeCap {
            what: "Clifford enumeration qubits",
            limit: ENUMERATE_MAX_QUBITS,
            requested: n,
        });
    }
    let w = 2 * n;
    let total_bits = w * w;
    let row_mask = (1u64 << w) - 1;
    let mut out = Vec::new();
    for code in 0u64..(1u64 << total_bits) {
        let rows: Vec<u64> = (0..w).map(|i| (code >> (i * w)) & row_mask).collect();
        let t = CliffordTableau { n, rows, phases: 0 };
        if t.is_symplectic() {
            for phases in 0..(1u64 << w) {
                out.push(CliffordTableau {
                    phases,
                    ..t.clone()
                });
            }
        }
    }
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SeedStream;
    use crate::pauli::pauli_basis;

    #[test]
    fn cardinalities() {
        assert_eq!(clifford_cardinality(1), BigUint::from(24u32));
        assert_eq!(clifford_cardinality(2), BigUint::from(11520u32));
        assert_eq!(clifford_cardinality(3), BigUint::from(92_897_280u64));
    }

    #[test]
    fn enumeration_sizes() {
        assert_eq!(enumerate_cliffords(1).unwrap().len(), 24);
        let two = enumerate_cliffords(2).unwrap();
        assert_eq!(two.len(), 11520);
        assert!(two.windows(2).all(|w| w[0] < w[1]));
        assert!(enumerate_cliffords(3).is_err());
    }

    #[test]
    fn identity_tableau_gives_identity() {
        for n in 1..=3 {
            let u = CliffordTableau::identity(n).to_unitary().unwrap();
            assert!((&u - &ComplexMatrix::identity(1 << n)).max_abs() < 1e-14);
        }
    }

    #[test]
    fn hadamard_swaps_x_and_z() {
        let u = CliffordTableau::hadamard().to_unitary().unwrap();
        let x = PauliOperator::new(1, 1, 0, 0).unwrap().dense().unwrap();
        let z = PauliOperator::new(1, 0, 1, 0).unwrap().dense().unwrap();
        let uxu = u.matmul(&x).matmul(&u.adjoint());
        assert!((&uxu - &z).max_abs() < 1e-14);
    }

    #[test]
    fn rejects_non_symplectic() {
        assert!(CliffordTableau::new(1, vec![0b01, 0b01], 0).is_err());
        assert!(CliffordTableau::new(1, vec![0b01], 0).is_err());
    }

    #[test]
    fn sampled_tableaux_conjugate_all_paulis() {
        let mut rng = SeedStream::new(99, 0).rng();
        for n in 1..=3 {
            for _ in 0..10 {
                let t = sample_clifford(n, &mut rng).unwrap();
                assert!(t.is_symplectic());
                let u = t.to_unitary().unwrap();
                assert!(u.is_unitary(1e-12));
                for p in pauli_basis(n) {
                    let lhs = u.matmul(&p.dense().unwrap()).matmul(&u.adjoint());
                    let rhs = t.conjugate_pauli(&p).dense().unwrap();
                    assert!((&lhs - &rhs).max_abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn larger_sample_is_symplectic() {
        let mut rng = SeedStream::new(1, 0).rng();
        for _ in 0..20 {
            assert!(sample_clifford(6, &mut rng).unwrap().is_symplectic());
        }
    }

    #[test]
    fn string_round_trip() {
        let mut rng = SeedStream::new(4, 4).rng();
        let t = sample_clifford(3, &mut rng).unwrap();
        let s = t.serialize();
        assert_eq!(s.split(';').nth(1).unwrap().len(), 36);
        let back: CliffordTableau = s.parse().unwrap();
        assert_eq!(back, t);
        assert_eq!(CliffordTableau::hadamard().to_string(), "1;0110;00");
        assert!("1;0101;00".parse::<CliffordTableau>().is_err());
    }
}
