//! Dense complex linear algebra.

mod eigh;
mod haar;
mod matrix;
mod rng;

pub use eigh::{eigh, Eigh, EIGH_MAX_DIM};
pub use haar::{complex_gaussian, ginibre, haar_state, haar_unitary, random_hermitian};
pub(crate) use matrix::ZERO;
pub use matrix::{ComplexMatrix, HermitianMatrix, HERMITIAN_TOL};
pub use rng::{mix_words, SeedStream, StreamRng};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tensor factor of a bipartite `d ⊗ d` space. `First` is the left Kronecker
/// factor (the most significant index).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Subsystem {
    First,
    Second,
}

/// Supported Schatten exponents.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SchattenP {
    One,
    Two,
    Infinity,
}

/// Partial trace of an arbitrary `d²×d²` matrix over `subsystem`.
pub fn partial_trace_matrix(m: &ComplexMatrix, subsystem: Subsystem, d: usize) -> Result<ComplexMatrix> {
    if !m.is_square() || m.rows() != d * d {
        return Err(Error::NotPerfectSquare { dim: m.rows(), d });
    }
    let n = d * d;
    let data = m.as_slice();
    let mut out = ComplexMatrix::zeros(d, d);
    match subsystem {
        Subsystem::First => {
            for i in 0..d {
                for a in 0..d {
                    let row = &data[(i * d + a) * n + i * d..(i * d + a) * n + i * d + d];
                    for (b, z) in row.iter().enumerate() {
                        out[(a, b)] += z;
                    }
                }
            }
        }
        Subsystem::Second => {
            for i in 0..d {
                for j in 0..d {
                    let mut acc = ZERO;
                    for a in 0..d {
                        acc += data[(i * d + a) * n + j * d + a];
                    }
                    out[(i, j)] = acc;
                }
            }
        }
    }
    Ok(out)
}

/// Partial trace of a Hermitian `d²×d²` matrix over `subsystem`.
pub fn partial_trace(m: &HermitianMatrix, subsystem: Subsystem, d: usize) -> Result<HermitianMatrix> {
    partial_trace_matrix(m.as_matrix(), subsystem, d).map(|t| HermitianMatrix::symmetrize(&t))
}

/// Schatten norm from the spectrum; `p = 2` is computed as the Frobenius norm.
pub fn schatten_norm(h: &HermitianMatrix, p: SchattenP) -> Result<f64> {
    match p {
        SchattenP::Two => Ok(h.frobenius_norm()),
        SchattenP::One => Ok(eigh(h)?.values.iter().map(|x| x.abs()).sum()),
        SchattenP::Infinity => Ok(eigh(h)?.values.iter().fold(0.0f64, |a, x| a.max(x.abs()))),
    }
}

/// `d^{-1/2} Σ_k |k⟩⊗|k⟩`.
pub fn max_entangled(d: usize) -> Vec<C64> {
    let mut v = vec![ZERO; d * d];
    let amp = 1.0 / (d as f64).sqrt();
    for k in 0..d {
        v[k * d + k] = C64::new(amp, 0.0);
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_trace_of_identity() {
        let id = HermitianMatrix::identity(9);
        let t = partial_trace(&id, Subsystem::First, 3).unwrap();
        assert!((t.as_matrix() - &ComplexMatrix::identity(3).scale_real(3.0)).max_abs() < 1e-15);
    }

    #[test]
    fn partial_trace_of_product() {
        let mut rng = SeedStream::new(5, 5).rng();
        let rho = random_hermitian(3, &mut rng);
        let s = random_hermitian(3, &mut rng);
        let sigma = s.scale(1.0 / s.trace());
        let prod = HermitianMatrix::symmetrize(&rho.as_matrix().kron(sigma.as_matrix()));
        let t = partial_trace(&prod, Subsystem::Second, 3).unwrap();
        assert!((t.as_matrix() - rho.as_matrix()).max_abs() < 1e-12);
        let r = partial_trace(&prod, Subsystem::First, 3).unwrap();
        assert!((r.as_matrix() - &sigma.as_matrix().scale_real(rho.trace())).max_abs() < 1e-12);
    }

    #[test]
    fn partial_trace_rejects_wrong_dim() {
        let id = HermitianMatrix::identity(8);
        assert!(matches!(
            partial_trace(&id, Subsystem::First, 3),
            Err(Error::NotPerfectSquare { dim: 8, d: 3 })
        ));
    }

    #[test]
    fn schatten_identity_and_projector() {
        let id = HermitianMatrix::identity(5);
        assert!((schatten_norm(&id, SchattenP::One).unwrap() - 5.0).abs() < 1e-12);
        assert!((schatten_norm(&id, SchattenP::Two).unwrap() - 5f64.sqrt()).abs() < 1e-12);
        assert!((schatten_norm(&id, SchattenP::Infinity).unwrap() - 1.0).abs() < 1e-12);
        let p = HermitianMatrix::projector(&max_entangled(3));
        for q in [SchattenP::One, SchattenP::Two, SchattenP::Infinity] {
            assert!((schatten_norm(&p, q).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn max_entangled_small() {
        assert_eq!(max_entangled(1), vec![matrix::ONE]);
        let v = max_entangled(2);
        let a = std::f64::consts::FRAC_1_SQRT_2;
        assert!((v[0].re - a).abs() < 1e-15 && (v[3].re - a).abs() < 1e-15);
        assert_eq!(v[1], ZERO);
        for d in 1..6 {
            let n: f64 = max_entangled(d).iter().map(|z| z.norm_sqr()).sum();
            assert!((n - 1.0).abs() < 1e-14);
        }
    }
}
