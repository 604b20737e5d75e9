//! Projections onto the PSD cone and the affine set of unital
//! trace-preserving Choi matrices.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{eigh, partial_trace_matrix, HermitianMatrix, Subsystem};

/// Nearest PSD matrix in Frobenius norm, by clipping negative eigenvalues.
pub fn project_psd(h: &HermitianMatrix) -> Result<HermitianMatrix> {
    let e = eigh(h)?;
    let negatives = e.values.iter().filter(|&&x| x < 0.0).count();
    if negatives == 0 {
        return Ok(h.clone());
    }
    if 2 * negatives <= e.values.len() {
        // fewer terms to subtract than to keep
        let mut out = h.clone();
        for (i, &lam) in e.values.iter().enumerate().take(negatives) {
            out.add_rank_one(-lam, &e.vector(i));
        }
        Ok(HermitianMatrix::symmetrize(out.as_matrix()))
    } else {
        Ok(e.reconstruct_with(|x| x.max(0.0)))
    }
}

fn check_bipartite(h: &HermitianMatrix, d: usize) -> Result<()> {
    if h.dim() != d * d {
        return Err(Error::NotPerfectSquare { dim: h.dim(), d });
    }
    Ok(())
}

/// Orthogonal projection of the part of `h` with vanishing partial traces,
/// `Z − (Tr₂Z ⊗ Id)/d − (Id ⊗ Tr₁Z)/d + Tr(Z) Id/d²`, plus `shift · Id`.
fn remove_marginals(h: &HermitianMatrix, d: usize, shift: f64) -> Result<HermitianMatrix> {
    check_bipartite(h, d)?;
    let m = h.as_matrix();
    let on_first = partial_trace_matrix(m, Subsystem::Second, d)?;
    let on_second = partial_trace_matrix(m, Subsystem::First, d)?;
    let tr = h.trace();
    let inv_d = 1.0 / d as f64;
    let mut out = m.clone();
    for i in 0..d {
        for a in 0..d {
            for j in 0..d {
                out[(i * d + a, j * d + a)] -= on_first[(i, j)] * inv_d;
            }
            for b in 0..d {
                out[(i * d + a, i * d + b)] -= on_second[(a, b)] * inv_d;
            }
        }
    }
    let diag = C64::new(tr * inv_d * inv_d + shift, 0.0);
    for k in 0..d * d {
        out[(k, k)] += diag;
    }
    Ok(HermitianMatrix::symmetrize(&out))
}

/// Orthogonal projection onto `{Z : Tr₁Z = Tr₂Z = Id/d}`, which fixes `Tr Z = 1`.
pub fn project_affine_utp(h: &HermitianMatrix, d: usize) -> Result<HermitianMatrix> {
    remove_marginals(h, d, 1.0 / (d * d) as f64)
}

/// Orthogonal projection onto the linear subspace parallel to the affine set.
pub fn project_marginal_free(h: &HermitianMatrix, d: usize) -> Result<HermitianMatrix> {
    remove_marginals(h, d, 0.0)
}

/// `max(‖Tr₁Z − Id/d‖_F, ‖Tr₂Z − Id/d‖_F)`.
pub fn marginal_gap(h: &HermitianMatrix, d: usize) -> Result<f64> {
    check_bipartite(h, d)?;
    let target = C64::new(1.0 / d as f64, 0.0);
    let mut gap = 0.0f64;
    for side in [Subsystem::First, Subsystem::Second] {
        let mut t = partial_trace_matrix(h.as_matrix(), side, d)?;
        for k in 0..d {
            t[(k, k)] -= target;
        }
        gap = gap.max(t.frobenius_norm());
    }
    Ok(gap)
}

/// Output of [`dykstra_projection`]. The matrix is PSD by construction.
#[derive(Clone, Debug)]
pub struct DykstraOutcome {
    pub matrix: HermitianMatrix,
    pub gap: f64,
    pub iterations: usize,
}

/// Dykstra alternation for the projection of `h` onto PSD ∩ affine-UTP.
///
/// The affine set needs no correction term. Iteration stops once the
/// marginal gap of the PSD iterate is at most `tol` or after `max_iters`.
pub fn dykstra_projection(h: &HermitianMatrix, d: usize, max_iters: usize, tol: f64) -> Result<DykstraOutcome> {
    check_bipartite(h, d)?;
    let mut x = project_psd(h)?;
    let mut gap = marginal_gap(&x, d)?;
    let mut correction = HermitianMatrix::zeros(d * d);
    let mut iterations = 0;
    while gap > tol && iterations < max_iters {
        let y = if iterations == 0 {
            project_affine_utp(h, d)?
        } else {
            project_affine_utp(&x, d)?
        };
        let shifted = &y + &correction;
        x = project_psd(&shifted)?;
        correction = &shifted - &x;
        gap = marginal_gap(&x, d)?;
        iterations += 1;
    }
    Ok(DykstraOutcome { matrix: x, gap, iterations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{random_cptp, random_mixed_unitary};
    use crate::linalg::{random_hermitian, SeedStream};

    #[test]
    fn psd_clipping() {
        let h = HermitianMatrix::from_real_diagonal(&[1.0, -1.0]);
        let p = project_psd(&h).unwrap();
        assert!((&p - &HermitianMatrix::from_real_diagonal(&[1.0, 0.0])).frobenius_norm() < 1e-14);
        let mut rng = SeedStream::new(1, 0).rng();
        for n in [3, 8] {
            let h = random_hermitian(n, &mut rng);
            let p = project_psd(&h).unwrap();
            assert!((&project_psd(&p).unwrap() - &p).frobenius_norm() < 1e-10);
            assert!(eigh(&p).unwrap().values[0] > -1e-12);
        }
    }

    #[test]
    fn affine_projection_is_idempotent_and_fixes_channels() {
        let mut rng = SeedStream::new(2, 0).rng();
        for _ in 0..20 {
            let h = random_hermitian(9, &mut rng);
            let p = project_affine_utp(&h, 3).unwrap();
            assert!(marginal_gap(&p, 3).unwrap() < 1e-12);
            assert!((p.trace() - 1.0).abs() < 1e-12);
            assert!((&project_affine_utp(&p, 3).unwrap() - &p).frobenius_norm() < 1e-10);
        }
        let x = random_mixed_unitary(3, 2, &mut rng);
        let p = project_affine_utp(x.matrix(), 3).unwrap();
        assert!((&p - x.matrix()).frobenius_norm() < 1e-10);
    }

    #[test]
    fn affine_projection_is_orthogonal() {
        // Z − P(Z) must be orthogonal to every difference of feasible points
        let mut rng = SeedStream::new(3, 0).rng();
        let h = random_hermitian(4, &mut rng);
        let p = project_affine_utp(&h, 2).unwrap();
        let r = &h - &p;
        for _ in 0..10 {
            let a = random_mixed_unitary(2, 3, &mut rng);
            let b = random_mixed_unitary(2, 2, &mut rng);
            let dir = a.matrix() - b.matrix();
            assert!(r.inner(&dir).abs() < 1e-12);
        }
    }

    #[test]
    fn dykstra_reaches_the_intersection() {
        let mut rng = SeedStream::new(4, 0).rng();
        for _ in 0..5 {
            let x = random_cptp(2, 3, &mut rng);
            let noisy = &x.matrix().clone() + &random_hermitian(4, &mut rng).scale(0.05);
            let out = dykstra_projection(&noisy, 2, 5000, 1e-9).unwrap();
            assert!(out.gap <= 1e-9, "gap {}", out.gap);
            assert!(eigh(&out.matrix).unwrap().values[0] >= -1e-12);
        }
    }
}
