use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clifford::{sample_clifford, CliffordTableau};
use crate::error::{Error, Result};
use crate::linalg::{haar_unitary, ComplexMatrix, SeedStream};

use super::partition::CharacterTable;
use super::permutation::{tensor_dim, trace_with_permutation, SymmetricGroup};
use super::projectors::{central_idempotent, q_projector, Q_MAX_QUBITS};

/// Isotypic components whose dimension falls below this are treated as
/// absent.
const ABSENT_DIM: f64 = 0.5;

fn check_square(a: &ComplexMatrix, dim: usize) -> Result<()> {
    if a.rows() != dim || a.cols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: a.rows(),
        });
    }
    Ok(())
}

/// Group-algebra element `Σ_λ w(λ) (d_λ/k!) Σ_σ χ^λ(σ) σ`.
fn weighted_centrals(
    group: &SymmetricGroup,
    table: &CharacterTable,
    mut weight: impl FnMut(f64, &[C64]) -> Option<f64>,
) -> Result<Vec<C64>> {
    let mut m = vec![C64::new(0.0, 0.0); group.order()];
    for lam in &table.irreps {
        let central = central_idempotent(group, table, lam)?;
        if let Some(w) = weight(lam.specht_dim() as f64, &central) {
            for (x, c) in m.iter_mut().zip(&central) {
                *x += c * w;
            }
        }
    }
    Ok(m)
}

/// Exact Haar average of `U^{⊗k} A U^{†⊗k}`:
/// `(1/k!) Σ_τ Tr(A π(τ)) π(τ⁻¹) · Σ_λ (d_λ/D_λ) P_λ`.
pub fn twirl_unitary(a: &ComplexMatrix, d: usize, k: usize) -> Result<ComplexMatrix> {
    let dim = tensor_dim(d, k)?;
    check_square(a, dim)?;
    let group = SymmetricGroup::new(k);
    let table = CharacterTable::standard(k)?;
    let fact = group.order() as f64;

    let mut b = vec![C64::new(0.0, 0.0); group.order()];
    for (t, tau) in group.elements().iter().enumerate() {
        b[group.inverse(t)] = trace_with_permutation(a, tau, d) / fact;
    }
    let cycles: Vec<i32> = group.elements().iter().map(|s| s.num_cycles() as i32).collect();
    let m = weighted_centrals(&group, &table, |dl, central| {
        // Tr P_λ from Tr π(σ) = d^{#cycles(σ)}
        let tr: f64 = central.iter().zip(&cycles).map(|(c, &n)| c.re * (d as f64).powi(n)).sum();
        let weyl = tr / dl;
        (weyl > ABSENT_DIM).then(|| dl / weyl)
    })?;
    group.materialize(&group.convolve(&b, &m), d)
}

/// `Σ_g x[g] Q π(g)`; column `c` of `Q π(g)` is column `g(c)` of `Q`.
fn add_q_times_perm(out: &mut ComplexMatrix, q: &ComplexMatrix, group: &SymmetricGroup, x: &[C64], d: usize) {
    let dim = q.rows();
    for (g, &coef) in x.iter().enumerate() {
        if coef == C64::new(0.0, 0.0) {
            continue;
        }
        let map = group.element(g).index_map(d);
        for r in 0..dim {
            let qrow = q.row(r);
            for (c, &src) in map.iter().enumerate() {
                out[(r, c)] += coef * qrow[src];
            }
        }
    }
}

/// Exact Clifford average of `C^{⊗4} A C^{†⊗4}` on `n ≤ 2` qubits.
///
/// The fourth tensor power splits along `Q` and `Id − Q`; within each part
/// the average has the same form as the unitary twirl with the dimensions
/// `D^±_λ = Tr(Q^± P_λ)/d_λ`. Components with vanishing `D^±_λ` are skipped.
pub fn twirl_clifford(a: &ComplexMatrix, n: usize) -> Result<ComplexMatrix> {
    if n == 0 || n > Q_MAX_QUBITS {
        return Err(Error::SizeCap {
            what: "Clifford twirl qubits",
            limit: Q_MAX_QUBITS,
            requested: n,
        });
    }
    let d = 1usize << n;
    let k = 4;
    let dim = d.pow(4);
    check_square(a, dim)?;
    let q = q_projector(n)?.into_matrix();
    let aq = a.matmul(&q);
    let group = SymmetricGroup::new(k);
    let table = CharacterTable::standard(k)?;
    let fact = group.order() as f64;

    let mut b_plus = vec![C64::new(0.0, 0.0); group.order()];
    let mut b_minus = vec![C64::new(0.0, 0.0); group.order()];
    for (t, tau) in group.elements().iter().enumerate() {
        let with_q = trace_with_permutation(&aq, tau, d);
        let full = trace_with_permutation(a, tau, d);
        b_plus[group.inverse(t)] = with_q / fact;
        b_minus[group.inverse(t)] = (full - with_q) / fact;
    }

    let trace_q_perm: Vec<f64> = group.elements().iter().map(|s| trace_with_permutation(&q, s, d).re).collect();
    let cycles: Vec<i32> = group.elements().iter().map(|s| s.num_cycles() as i32).collect();
    let weights = |plus: bool| {
        weighted_centrals(&group, &table, |dl, central| {
            let tr_q: f64 = central.iter().zip(&trace_q_perm).map(|(c, t)| c.re * t).sum();
            let tr: f64 = central.iter().zip(&cycles).map(|(c, &m)| c.re * (d as f64).powi(m)).sum();
            let dim_part = if plus { tr_q / dl } else { (tr - tr_q) / dl };
            (dim_part > ABSENT_DIM).then(|| dl / dim_part)
        })
    };
    let m_plus = weights(true)?;
    let m_minus = weights(false)?;
    let c_plus = group.convolve(&b_plus, &m_plus);
    let c_minus = group.convolve(&b_minus, &m_minus);

    // Q π(c⁺) + (Id − Q) π(c⁻) = Q π(c⁺ − c⁻) + π(c⁻)
    let mut out = group.materialize(&c_minus, d)?;
    let diff: Vec<C64> = c_plus.iter().zip(&c_minus).map(|(p, m)| p - m).collect();
    add_q_times_perm(&mut out, &q, &group, &diff, d);
    Ok(out)
}

/// Sampling ensemble for Monte Carlo twirls.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TwirlEnsemble {
    Haar,
    Clifford,
}

/// Empirical twirl with per-entry standard errors of the complex mean.
#[derive(Clone, Debug)]
pub struct TwirlEstimate {
    pub mean: ComplexMatrix,
    /// `sqrt(Var(Re) + Var(Im)) / sqrt(N)` per entry, row-major.
    pub std_error: Vec<f64>,
    pub samples: usize,
}

impl TwirlEstimate {
    /// Largest `|mean − exact| / (std_error + floor)` over entries.
    pub fn max_z_score(&self, exact: &ComplexMatrix, floor: f64) -> f64 {
        self.mean
            .as_slice()
            .iter()
            .zip(exact.as_slice())
            .zip(&self.std_error)
            .map(|((m, e), s)| (m - e).norm() / (s + floor))
            .fold(0.0, f64::max)
    }
}

#[derive(Clone)]
struct Moments {
    sum: Vec<C64>,
    sum_sq: Vec<f64>,
}

impl Moments {
    fn new(len: usize) -> Self {
        Self {
            sum: vec![C64::new(0.0, 0.0); len],
            sum_sq: vec![0.0; len],
        }
    }

    fn add(&mut self, m: &ComplexMatrix, weight: f64) {
        for ((s, q), z) in self.sum.iter_mut().zip(&mut self.sum_sq).zip(m.as_slice()) {
            *s += z * weight;
            *q += z.norm_sqr() * weight;
        }
    }

    fn merge(mut self, other: &Moments) -> Self {
        for (a, b) in self.sum.iter_mut().zip(&other.sum) {
            *a += b;
        }
        for (a, b) in self.sum_sq.iter_mut().zip(&other.sum_sq) {
            *a += b;
        }
        self
    }

    fn finish(self, rows: usize, samples: usize) -> TwirlEstimate {
        let n = samples as f64;
        let mean: Vec<C64> = self.sum.iter().map(|s| s / n).collect();
        let std_error = if samples > 1 {
            self.sum_sq
                .iter()
                .zip(&mean)
                .map(|(q, m)| {
                    let var = ((q - n * m.norm_sqr()) / (n - 1.0)).max(0.0);
                    (var / n).sqrt()
                })
                .collect()
        } else {
            vec![0.0; mean.len()]
        };
        TwirlEstimate {
            mean: ComplexMatrix::from_vec(rows, rows, mean).expect("square buffer"),
            std_error,
            samples,
        }
    }
}

const HAAR_CHUNK: usize = 1000;

/// Monte Carlo average of `R(g)^{⊗k} A R(g)^{†⊗k}`.
///
/// Haar samples are drawn in fixed-size chunks, each from its own substream,
/// and partial sums are reduced in chunk order, so the result does not depend
/// on the thread count. Clifford samples are tallied first and each distinct
/// element is conjugated once with its multiplicity as weight.
pub fn twirl_monte_carlo(
    a: &ComplexMatrix,
    d: usize,
    k: usize,
    ensemble: TwirlEnsemble,
    samples: usize,
    stream: SeedStream,
) -> Result<TwirlEstimate> {
    let dim = tensor_dim(d, k)?;
    check_square(a, dim)?;
    if samples == 0 {
        return Err(Error::InvalidInput("at least one sample is required".into()));
    }
    let len = dim * dim;
    let moments = match ensemble {
        TwirlEnsemble::Haar => {
            let chunks = samples.div_ceil(HAAR_CHUNK);
            let partials: Vec<Moments> = (0..chunks)
                .into_par_iter()
                .map(|c| {
                    let mut rng = stream.substream(c as u64).rng();
                    let count = HAAR_CHUNK.min(samples - c * HAAR_CHUNK);
                    let mut m = Moments::new(len);
                    for _ in 0..count {
                        let u = haar_unitary(d, &mut rng);
                        m.add(&a.conjugate_tensor_power(&u, k), 1.0);
                    }
                    m
                })
                .collect();
            partials.iter().fold(Moments::new(len), |acc, p| acc.merge(p))
        }
        TwirlEnsemble::Clifford => {
            if !d.is_power_of_two() {
                return Err(Error::InvalidInput(format!("dimension {d} is not a power of two")));
            }
            let n = d.trailing_zeros() as usize;
            let mut rng = stream.rng();
            let mut tally: BTreeMap<CliffordTableau, usize> = BTreeMap::new();
            for _ in 0..samples {
                *tally.entry(sample_clifford(n, &mut rng)?).or_default() += 1;
            }
            let items: Vec<(CliffordTableau, usize)> = tally.into_iter().collect();
            let partials: Vec<Result<Moments>> = items
                .par_chunks(64)
                .map(|chunk| {
                    let mut m = Moments::new(len);
                    for (t, count) in chunk {
                        let u = t.to_unitary()?;
                        m.add(&a.conjugate_tensor_power(&u, k), *count as f64);
                    }
                    Ok(m)
                })
                .collect();
            let mut acc = Moments::new(len);
            for p in partials {
                acc = acc.merge(&p?);
            }
            acc
        }
    };
    Ok(moments.finish(dim, samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ginibre;
    use crate::schur_weyl::permutation::perm_operator;

    #[test]
    fn identity_is_fixed() {
        for (d, k) in [(2usize, 2usize), (2, 3), (3, 2), (2, 4)] {
            let dim = d.pow(k as u32);
            let id = ComplexMatrix::identity(dim);
            assert!((&twirl_unitary(&id, d, k).unwrap() - &id).max_abs() < 1e-12);
        }
        for n in 1..=2 {
            let id = ComplexMatrix::identity(1 << (4 * n));
            assert!((&twirl_clifford(&id, n).unwrap() - &id).max_abs() < 1e-12);
        }
    }

    #[test]
    fn permutations_are_fixed() {
        let group = SymmetricGroup::new(3);
        for s in group.elements() {
            let p = perm_operator(s, 2).unwrap();
            assert!((&twirl_unitary(&p, 2, 3).unwrap() - &p).max_abs() < 1e-12);
        }
    }

    #[test]
    fn trace_is_preserved() {
        let mut rng = SeedStream::new(2, 2).rng();
        let a = ginibre(27, 27, &mut rng);
        let t = twirl_unitary(&a, 3, 3).unwrap();
        assert!((t.trace() - a.trace()).norm() < 1e-10);
    }

    #[test]
    fn single_haar_sample_is_one_conjugation() {
        let mut rng = SeedStream::new(3, 3).rng();
        let a = ginibre(4, 4, &mut rng);
        let stream = SeedStream::new(10, 0);
        let est = twirl_monte_carlo(&a, 2, 2, TwirlEnsemble::Haar, 1, stream).unwrap();
        let u = haar_unitary(2, &mut stream.substream(0).rng());
        assert!((&est.mean - &a.conjugate_tensor_power(&u, 2)).max_abs() < 1e-14);
    }
}
