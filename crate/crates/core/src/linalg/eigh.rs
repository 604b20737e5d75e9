//! Hermitian eigendecomposition: Householder reduction to a real symmetric
//! tridiagonal matrix followed by implicit QL iterations with Wilkinson-type
//! shifts.

use num_complex::Complex64 as C64;

use super::matrix::{ComplexMatrix, HermitianMatrix, ONE, ZERO};
use crate::error::{Error, Result};

/// Largest dimension accepted by [`eigh`].
pub const EIGH_MAX_DIM: usize = 4096;

const MAX_QL_ITERS: usize = 64;

/// Eigenvalues in ascending order with the matching orthonormal eigenvectors
/// stored as the columns of `vectors`.
#[derive(Clone, Debug)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl Eigh {
    /// Column `i` of the eigenvector matrix.
    pub fn vector(&self, i: usize) -> Vec<C64> {
        self.vectors.column(i)
    }

    /// `Σ_i f(λ_i) v_i v_i†`, skipping terms where `f` returns zero.
    pub fn reconstruct_with(&self, mut f: impl FnMut(f64) -> f64) -> HermitianMatrix {
        let n = self.values.len();
        let mut out = HermitianMatrix::zeros(n);
        for (i, &lam) in self.values.iter().enumerate() {
            let w = f(lam);
            if w != 0.0 {
                out.add_rank_one(w, &self.vector(i));
            }
        }
        out
    }

    pub fn reconstruct(&self) -> HermitianMatrix {
        self.reconstruct_with(|x| x)
    }
}

/// Eigendecomposition of a Hermitian matrix.
pub fn eigh(h: &HermitianMatrix) -> Result<Eigh> {
    let n = h.dim();
    if n > EIGH_MAX_DIM {
        return Err(Error::SizeCap {
            what: "eigendecomposition",
            limit: EIGH_MAX_DIM,
            requested: n,
        });
    }
    if n == 0 {
        return Ok(Eigh {
            values: vec![],
            vectors: ComplexMatrix::zeros(0, 0),
        });
    }
    let (diag, off, mut vecs) = tridiagonalize(h.as_matrix());
    let mut d = diag;
    let mut e = off;
    ql_implicit(&mut d, &mut e, &mut vecs).map_err(|residual| Error::NoConvergence { dim: n, residual })?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values = order.iter().map(|&i| d[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| vecs[(r, order[c])]);
    Ok(Eigh { values, vectors })
}

/// Returns `(diag, offdiag, V)` with `A = V T V†` and `T` real symmetric
/// tridiagonal; `offdiag[i]` couples `i` and `i+1` and `offdiag[n-1] = 0`.
fn tridiagonalize(input: &ComplexMatrix) -> (Vec<f64>, Vec<f64>, ComplexMatrix) {
    let n = input.rows();
    let mut a = input.clone();
    let mut q = ComplexMatrix::identity(n);
    let mut v = vec![ZERO; n];
    let mut p = vec![ZERO; n];

    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        let mut xnorm2 = 0.0;
        for i in 0..m {
            xnorm2 += a[(k + 1 + i, k)].norm_sqr();
        }
        let xnorm = xnorm2.sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let x0 = a[(k + 1, k)];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { ONE };
        let alpha = -phase * xnorm;
        for i in 0..m {
            v[i] = a[(k + 1 + i, k)];
        }
        v[0] -= alpha;
        let vnorm = v[..m].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm <= f64::MIN_POSITIVE {
            continue;
        }
        for vi in &mut v[..m] {
            *vi /= vnorm;
        }
        // p = B v with B the trailing block
        for i in 0..m {
            let row = &a.as_slice()[(k + 1 + i) * n + k + 1..(k + 2 + i) * n];
            p[i] = row.iter().zip(&v[..m]).map(|(b, x)| b * x).sum();
        }
        let kappa: C64 = v[..m].iter().zip(&p[..m]).map(|(x, y)| x.conj() * y).sum();
        // w = p - kappa v; B -= 2 (v w† + w v†)
        for i in 0..m {
            p[i] -= kappa * v[i];
        }
        {
            let data = a.as_mut_slice();
            for i in 0..m {
                let vi2 = v[i] * 2.0;
                let wi2 = p[i] * 2.0;
                let row = &mut data[(k + 1 + i) * n + k + 1..(k + 2 + i) * n];
                for j in 0..m {
                    row[j] -= vi2 * p[j].conj() + wi2 * v[j].conj();
                }
            }
        }
        a[(k + 1, k)] = alpha;
        a[(k, k + 1)] = alpha.conj();
        for i in 1..m {
            a[(k + 1 + i, k)] = ZERO;
            a[(k, k + 1 + i)] = ZERO;
        }
        // Q <- Q (I - 2 v v†) on columns k+1..n
        let data = q.as_mut_slice();
        for r in 0..n {
            let row = &mut data[r * n + k + 1..(r + 1) * n];
            let s: C64 = row.iter().zip(&v[..m]).map(|(x, y)| x * y).sum();
            let s2 = s * 2.0;
            for (x, y) in row.iter_mut().zip(&v[..m]) {
                *x -= s2 * y.conj();
            }
        }
    }

    // Phase-rotate so that the off-diagonal becomes real and non-negative.
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    let mut off = vec![0.0; n];
    let mut delta = ONE;
    for i in 0..n {
        if i > 0 {
            let e = a[(i, i - 1)];
            let mag = e.norm();
            if mag > 0.0 {
                delta *= e / mag;
            }
            off[i - 1] = mag;
        }
        if delta != ONE {
            for r in 0..n {
                q[(r, i)] *= delta;
            }
        }
    }
    (diag, off, q)
}

/// Implicit QL on a real symmetric tridiagonal matrix, accumulating the
/// rotations into the columns of `z`. On failure returns the largest
/// remaining off-diagonal magnitude.
fn ql_implicit(d: &mut [f64], e: &mut [f64], z: &mut ComplexMatrix) -> std::result::Result<(), f64> {
    let n = d.len();
    let rows = z.rows();
    // absolute deflation floor, so clusters near zero still split off
    let scale = (0..n).fold(0.0f64, |acc, i| {
        acc.max(d[i].abs() + e[i].abs() + if i > 0 { e[i - 1].abs() } else { 0.0 })
    });
    let floor = f64::EPSILON * scale;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd || e[m].abs() <= floor {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_QL_ITERS {
                return Err(e.iter().fold(0.0f64, |acc, x| acc.max(x.abs())));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let data = z.as_mut_slice();
                for k in 0..rows {
                    let zi = data[k * n + i];
                    let zi1 = data[k * n + i + 1];
                    data[k * n + i + 1] = zi * s + zi1 * c;
                    data[k * n + i] = zi * c - zi1 * s;
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{random_hermitian, SeedStream};

    fn residual(h: &HermitianMatrix, eig: &Eigh) -> (f64, f64) {
        let rec = eig.reconstruct();
        let res = (h - &rec).frobenius_norm() / h.frobenius_norm().max(1.0);
        let orth = eig.vectors.unitarity_defect();
        (res, orth)
    }

    #[test]
    fn diagonal_input_sorted() {
        let h = HermitianMatrix::from_real_diagonal(&[3.0, 1.0, 2.0]);
        let eig = eigh(&h).unwrap();
        assert_eq!(eig.values, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn pauli_x_spectrum() {
        let x = ComplexMatrix::from_fn(2, 2, |i, j| if i != j { ONE } else { ZERO });
        let eig = eigh(&HermitianMatrix::new(x).unwrap()).unwrap();
        assert!((eig.values[0] + 1.0).abs() < 1e-14);
        assert!((eig.values[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn random_eight_by_eight_round_trip() {
        let mut rng = SeedStream::new(7, 0).rng();
        let h = random_hermitian(8, &mut rng);
        let eig = eigh(&h).unwrap();
        let (res, orth) = residual(&h, &eig);
        assert!(res <= 1e-10, "residual {res}");
        assert!(orth <= 1e-10, "orthogonality {orth}");
    }

    #[test]
    fn round_trip_up_to_64() {
        let mut rng = SeedStream::new(11, 3).rng();
        for n in [1, 2, 3, 5, 16, 33, 64] {
            let h = random_hermitian(n, &mut rng);
            let eig = eigh(&h).unwrap();
            let (res, orth) = residual(&h, &eig);
            assert!(res <= 1e-10 && orth <= 1e-10, "n={n}: {res} {orth}");
            assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn degenerate_spectrum() {
        let h = HermitianMatrix::identity(6);
        let eig = eigh(&h).unwrap();
        assert!(eig.values.iter().all(|&x| (x - 1.0).abs() < 1e-14));
        let (res, orth) = residual(&h, &eig);
        assert!(res < 1e-12 && orth < 1e-12);
    }

    #[test]
    fn low_rank_projector() {
        let v: Vec<C64> = (0..16).map(|i| C64::new(i as f64, -(i as f64) * 0.5)).collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let v: Vec<C64> = v.iter().map(|z| z / norm).collect();
        let h = HermitianMatrix::projector(&v);
        let eig = eigh(&h).unwrap();
        assert!((eig.values[15] - 1.0).abs() < 1e-12);
        assert!(eig.values[..15].iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn near_zero_cluster_with_roundoff() {
        // two large eigenvalues, a few at 1e-9 and the rest at roundoff level
        let mut rng = SeedStream::new(13, 0).rng();
        let u = crate::linalg::haar_unitary(64, &mut rng);
        let mut spectrum = vec![0.0; 64];
        spectrum[0] = 0.97;
        spectrum[1] = 0.03;
        for (k, s) in spectrum.iter_mut().enumerate().skip(2).take(6) {
            *s = 1e-9 * k as f64;
        }
        let diag = ComplexMatrix::from_diagonal(&spectrum.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>());
        let mut m = u.matmul(&diag).matmul(&u.adjoint());
        m.add_scaled(C64::new(1e-17, 0.0), &random_hermitian(64, &mut rng).into_matrix());
        let h = HermitianMatrix::symmetrize(&m);
        let eig = eigh(&h).unwrap();
        let (res, orth) = residual(&h, &eig);
        assert!(res <= 1e-12 && orth <= 1e-10, "{res} {orth}");
        assert!((eig.values[63] - 0.97).abs() < 1e-12);
    }
}
