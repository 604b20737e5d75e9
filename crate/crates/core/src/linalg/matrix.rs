use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Dense complex matrix stored row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = ONE;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in diag.iter().enumerate() {
            m.data[i * n + i] = v;
        }
        m
    }

    /// Rank-one matrix `u v†`.
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    /// `self += s * other`.
    pub fn add_scaled(&mut self, s: C64, other: &ComplexMatrix) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn frobenius_norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.frobenius_norm_sqr().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Hilbert-Schmidt inner product `Tr(self† other)`.
    pub fn hs_inner(&self, other: &ComplexMatrix) -> C64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `Tr(self · other)` without forming the product.
    pub fn trace_of_product(&self, other: &ComplexMatrix) -> C64 {
        assert_eq!(self.cols, other.rows);
        assert_eq!(self.rows, other.cols);
        let mut acc = ZERO;
        for i in 0..self.rows {
            for k in 0..self.cols {
                acc += self.data[i * self.cols + k] * other.data[k * other.cols + i];
            }
        }
        acc
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let (n, m, p) = (self.rows, self.cols, other.cols);
        let mut out = vec![ZERO; n * p];
        for i in 0..n {
            let out_row = &mut out[i * p..(i + 1) * p];
            for k in 0..m {
                let a = self.data[i * m + k];
                if a == ZERO {
                    continue;
                }
                let b_row = &other.data[k * p..(k + 1) * p];
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        ComplexMatrix {
            rows: n,
            cols: p,
            data: out,
        }
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn kron(&self, other: &ComplexMatrix) -> ComplexMatrix {
        let (r1, c1, r2, c2) = (self.rows, self.cols, other.rows, other.cols);
        let mut out = ComplexMatrix::zeros(r1 * r2, c1 * c2);
        for i1 in 0..r1 {
            for j1 in 0..c1 {
                let a = self[(i1, j1)];
                if a == ZERO {
                    continue;
                }
                for i2 in 0..r2 {
                    for j2 in 0..c2 {
                        out[(i1 * r2 + i2, j1 * c2 + j2)] = a * other[(i2, j2)];
                    }
                }
            }
        }
        out
    }

    /// k-fold tensor power.
    pub fn tensor_power(&self, k: usize) -> ComplexMatrix {
        let mut out = ComplexMatrix::identity(1);
        for _ in 0..k {
            out = out.kron(self);
        }
        out
    }

    /// `‖self − self†‖_F`.
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (self[(i, j)] - self[(j, i)].conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// `‖U†U − Id‖_F`.
    pub fn unitarity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        (&self.adjoint().matmul(self) - &ComplexMatrix::identity(self.rows)).frobenius_norm()
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() <= tol
    }

    /// Left multiplication by `U` acting on tensor leg `leg` of a `k`-leg
    /// space with local dimension `d` (legs ordered as Kronecker factors).
    pub(crate) fn apply_leg_left(&mut self, u: &ComplexMatrix, d: usize, k: usize, leg: usize) {
        // out[(.., i, ..), c] = Σ_j U[i, j] in[(.., j, ..), c]
        let stride = d.pow((k - 1 - leg) as u32);
        let block = stride * d;
        let cols = self.cols;
        let sparse = sparse_rows(u);
        let mut scratch = vec![ZERO; d * cols];
        for outer in (0..self.rows).step_by(block) {
            for inner in 0..stride {
                for (j, s) in scratch.chunks_mut(cols).enumerate() {
                    let r = outer + inner + j * stride;
                    s.copy_from_slice(&self.data[r * cols..(r + 1) * cols]);
                }
                for (i, entries) in sparse.iter().enumerate() {
                    let r = outer + inner + i * stride;
                    let dst = &mut self.data[r * cols..(r + 1) * cols];
                    dst.fill(ZERO);
                    for &(j, uij) in entries {
                        let src = &scratch[j * cols..(j + 1) * cols];
                        for (o, &x) in dst.iter_mut().zip(src) {
                            *o += uij * x;
                        }
                    }
                }
            }
        }
    }

    /// `self · U†` with `U` acting on tensor leg `leg`.
    pub(crate) fn apply_leg_right_adjoint(
        &mut self,
        u: &ComplexMatrix,
        d: usize,
        k: usize,
        leg: usize,
    ) {
        // out[r, (.., i, ..)] = Σ_j in[r, (.., j, ..)] conj(U[i, j])
        let stride = d.pow((k - 1 - leg) as u32);
        let block = stride * d;
        let cols = self.cols;
        let sparse = sparse_rows(u);
        let mut scratch = vec![ZERO; d];
        for r in 0..self.rows {
            let row = &mut self.data[r * cols..(r + 1) * cols];
            for outer in (0..cols).step_by(block) {
                for inner in 0..stride {
                    for (j, s) in scratch.iter_mut().enumerate() {
                        *s = row[outer + inner + j * stride];
                    }
                    for (i, entries) in sparse.iter().enumerate() {
                        let mut acc = ZERO;
                        for &(j, uij) in entries {
                            acc += scratch[j] * uij.conj();
                        }
                        row[outer + inner + i * stride] = acc;
                    }
                }
            }
        }
    }

    /// `U^{⊗k} · self · U^{†⊗k}` computed leg by leg.
    pub fn conjugate_tensor_power(&self, u: &ComplexMatrix, k: usize) -> ComplexMatrix {
        let d = u.rows;
        assert_eq!(self.rows, d.pow(k as u32));
        let mut out = self.clone();
        for leg in 0..k {
            out.apply_leg_left(u, d, k, leg);
        }
        for leg in 0..k {
            out.apply_leg_right_adjoint(u, d, k, leg);
        }
        out
    }
}

/// Row-wise nonzero pattern of a small dense matrix; exact zeros and
/// entries below 1e-15 in modulus are skipped.
fn sparse_rows(u: &ComplexMatrix) -> Vec<Vec<(usize, C64)>> {
    (0..u.rows)
        .map(|i| {
            (0..u.cols)
                .filter_map(|j| {
                    let v = u[(i, j)];
                    (v.norm() > 1e-15).then_some((j, v))
                })
                .collect()
        })
        .collect()
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.scale_real(-1.0)
    }
}

impl AddAssign<&ComplexMatrix> for ComplexMatrix {
    fn add_assign(&mut self, rhs: &ComplexMatrix) {
        self.add_scaled(ONE, rhs);
    }
}

impl SubAssign<&ComplexMatrix> for ComplexMatrix {
    fn sub_assign(&mut self, rhs: &ComplexMatrix) {
        self.add_scaled(-ONE, rhs);
    }
}

/// Hermitian matrix; the constructor symmetrizes its input.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ComplexMatrix", into = "ComplexMatrix")]
pub struct HermitianMatrix(ComplexMatrix);

/// Relative Hermiticity tolerance accepted by [`HermitianMatrix::new`].
pub const HERMITIAN_TOL: f64 = 1e-10;

impl HermitianMatrix {
    /// Accepts matrices with `‖M − M†‖_F ≤ 1e-10 · max(1, ‖M‖_F)` and
    /// returns the symmetrized `(M + M†)/2`.
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                expected: m.rows(),
                found: m.cols(),
            });
        }
        let defect = m.hermiticity_defect();
        if defect > HERMITIAN_TOL * m.frobenius_norm().max(1.0) {
            return Err(Error::InvalidInput(format!(
                "matrix is not Hermitian (defect {defect:e})"
            )));
        }
        Ok(Self::symmetrize(&m))
    }

    /// Hermitian part `(M + M†)/2` of an arbitrary square matrix.
    pub fn symmetrize(m: &ComplexMatrix) -> Self {
        assert!(m.is_square());
        let n = m.rows();
        let mut out = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            out[(i, i)] = C64::new(m[(i, i)].re, 0.0);
            for j in (i + 1)..n {
                let v = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
                out[(i, j)] = v;
                out[(j, i)] = v.conj();
            }
        }
        Self(out)
    }

    pub fn zeros(n: usize) -> Self {
        Self(ComplexMatrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        Self(ComplexMatrix::identity(n))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d: Vec<C64> = diag.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self(ComplexMatrix::from_diagonal(&d))
    }

    /// `|v⟩⟨v|`.
    pub fn projector(v: &[C64]) -> Self {
        Self::symmetrize(&ComplexMatrix::outer(v, v))
    }


    #[inline]
    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    #[inline]
    pub fn as_matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    /// `Tr(self · other)`, real for Hermitian operands.
    pub fn inner(&self, other: &HermitianMatrix) -> f64 {
        self.0.hs_inner(&other.0).re
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.frobenius_norm()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.scale_real(s))
    }

    pub fn add_scaled(&mut self, s: f64, other: &HermitianMatrix) {
        self.0.add_scaled(C64::new(s, 0.0), &other.0);
    }

    /// `⟨v| self |v⟩`.
    pub fn expectation(&self, v: &[C64]) -> f64 {
        let n = self.dim();
        assert_eq!(v.len(), n);
        let mut acc = ZERO;
        for i in 0..n {
            if v[i] == ZERO {
                continue;
            }
            let row = self.0.row(i);
            let s: C64 = row.iter().zip(v).map(|(a, b)| a * b).sum();
            acc += v[i].conj() * s;
        }
        acc.re
    }

    /// Adds `s · |v⟩⟨v|` in place.
    pub fn add_rank_one(&mut self, s: f64, v: &[C64]) {
        let n = self.dim();
        let data = self.0.as_mut_slice();
        for i in 0..n {
            let vi = v[i] * s;
            if vi == ZERO {
                continue;
            }
            let row = &mut data[i * n..(i + 1) * n];
            for (o, vj) in row.iter_mut().zip(v) {
                *o += vi * vj.conj();
            }
        }
    }
}

impl TryFrom<ComplexMatrix> for HermitianMatrix {
    type Error = Error;
    fn try_from(m: ComplexMatrix) -> Result<Self> {
        Self::new(m)
    }
}

impl From<HermitianMatrix> for ComplexMatrix {
    fn from(h: HermitianMatrix) -> Self {
        h.0
    }
}

impl Add for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn add(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn sub(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix(&self.0 - &rhs.0)
    }
}
