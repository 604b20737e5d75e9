use std::collections::HashMap;
use std::fmt;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

use super::partition::Partition;

/// Largest tensor-space dimension `d^k` for dense permutation operators.
pub const TENSOR_MAX_DIM: usize = 4096;

/// Permutation of `{0, …, k−1}` stored by images: `σ(j) = images[j]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let k = images.len();
        let mut seen = vec![false; k];
        for &i in &images {
            if i >= k || seen[i] {
                return Err(Error::InvalidInput(format!("{images:?} is not a permutation")));
            }
            seen[i] = true;
        }
        Ok(Self { images })
    }

    pub fn identity(k: usize) -> Self {
        Self {
            images: (0..k).collect(),
        }
    }

    /// Transposition of `a` and `b` in `S_k`.
    pub fn transposition(k: usize, a: usize, b: usize) -> Self {
        let mut images: Vec<usize> = (0..k).collect();
        images.swap(a, b);
        Self { images }
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn apply(&self, j: usize) -> usize {
        self.images[j]
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        assert_eq!(self.degree(), other.degree(), "degree mismatch");
        Permutation {
            images: other.images.iter().map(|&j| self.images[j]).collect(),
        }
    }

    /// Product read left to right: `first` is applied before `second`.
    pub fn then(first: &Permutation, second: &Permutation) -> Permutation {
        second.compose(first)
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.degree()];
        for (j, &i) in self.images.iter().enumerate() {
            inv[i] = j;
        }
        Permutation { images: inv }
    }

    /// Cycle lengths in non-increasing order.
    pub fn cycle_type(&self) -> Partition {
        let k = self.degree();
        let mut seen = vec![false; k];
        let mut lens = Vec::new();
        for s in 0..k {
            if seen[s] {
                continue;
            }
            let mut len = 0;
            let mut j = s;
            while !seen[j] {
                seen[j] = true;
                j = self.images[j];
                len += 1;
            }
            lens.push(len);
        }
        Partition::from_unsorted(lens)
    }

    pub fn num_cycles(&self) -> usize {
        self.cycle_type().len()
    }

    /// Row index of the single nonzero entry in column `col` of the
    /// permutation operator on `(C^d)^{⊗k}`: input leg `j` moves to output
    /// leg `σ(j)`. Leg 0 is the most significant digit.
    pub fn permute_index(&self, col: usize, d: usize) -> usize {
        let k = self.degree();
        let mut digits = [0usize; 8];
        let mut c = col;
        for j in (0..k).rev() {
            digits[j] = c % d;
            c /= d;
        }
        let mut out = [0usize; 8];
        for j in 0..k {
            out[self.images[j]] = digits[j];
        }
        out[..k].iter().fold(0, |acc, &x| acc * d + x)
    }

    /// `col ↦ row` table of the permutation operator.
    pub fn index_map(&self, d: usize) -> Vec<usize> {
        let dim = d.pow(self.degree() as u32);
        (0..dim).map(|c| self.permute_index(c, d)).collect()
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.images.iter().map(|i| i.to_string()).collect();
        write!(f, "[{}]", parts.join(" "))
    }
}

pub(crate) fn tensor_dim(d: usize, k: usize) -> Result<usize> {
    let dim = d.checked_pow(k as u32).filter(|&n| n <= TENSOR_MAX_DIM);
    dim.ok_or(Error::SizeCap {
        what: "tensor power dimension",
        limit: TENSOR_MAX_DIM,
        requested: d.saturating_pow(k as u32),
    })
}

/// Dense permutation operator `π(σ)` on `(C^d)^{⊗k}`, a homomorphism:
/// `π(σ ∘ τ) = π(σ) π(τ)`.
pub fn perm_operator(sigma: &Permutation, d: usize) -> Result<ComplexMatrix> {
    let dim = tensor_dim(d, sigma.degree())?;
    let mut m = ComplexMatrix::zeros(dim, dim);
    for c in 0..dim {
        m[(sigma.permute_index(c, d), c)] = C64::new(1.0, 0.0);
    }
    Ok(m)
}

/// `Tr(A π(σ)) = Σ_c A[c][σ(c)]`.
pub fn trace_with_permutation(a: &ComplexMatrix, sigma: &Permutation, d: usize) -> C64 {
    let dim = a.rows();
    (0..dim).map(|c| a[(c, sigma.permute_index(c, d))]).sum()
}

/// All of `S_k` in lexicographic order of images, with a multiplication
/// table.
#[derive(Clone, Debug)]
pub struct SymmetricGroup {
    k: usize,
    elements: Vec<Permutation>,
    index: HashMap<Permutation, usize>,
    table: Vec<usize>,
    inverses: Vec<usize>,
}

fn all_permutations(k: usize) -> Vec<Permutation> {
    fn rec(k: usize, cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Permutation>) {
        if cur.len() == k {
            out.push(Permutation { images: cur.clone() });
            return;
        }
        for i in 0..k {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(k, cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(k, &mut Vec::new(), &mut vec![false; k], &mut out);
    out
}

impl SymmetricGroup {
    pub fn new(k: usize) -> Self {
        let elements = all_permutations(k);
        let index: HashMap<Permutation, usize> = elements.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        let n = elements.len();
        let mut table = vec![0; n * n];
        for (a, pa) in elements.iter().enumerate() {
            for (b, pb) in elements.iter().enumerate() {
                table[a * n + b] = index[&pa.compose(pb)];
            }
        }
        let inverses = elements.iter().map(|p| index[&p.inverse()]).collect();
        Self {
            k,
            elements,
            index,
            table,
            inverses,
        }
    }

    pub fn degree(&self) -> usize {
        self.k
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[Permutation] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &Permutation {
        &self.elements[i]
    }

    pub fn index_of(&self, p: &Permutation) -> usize {
        self.index[p]
    }

    /// Index of `elements[a] ∘ elements[b]`.
    pub fn product(&self, a: usize, b: usize) -> usize {
        self.table[a * self.order() + b]
    }

    pub fn inverse(&self, a: usize) -> usize {
        self.inverses[a]
    }

    /// Convolution in the group algebra: `(x * y)[g∘h] += x[g] y[h]`.
    pub fn convolve(&self, x: &[C64], y: &[C64]) -> Vec<C64> {
        let n = self.order();
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (a, &xa) in x.iter().enumerate() {
            if xa == C64::new(0.0, 0.0) {
                continue;
            }
            for (b, &yb) in y.iter().enumerate() {
                out[self.product(a, b)] += xa * yb;
            }
        }
        out
    }

    /// Dense image `Σ_g x[g] π(g)` of a group-algebra element.
    pub fn materialize(&self, x: &[C64], d: usize) -> Result<ComplexMatrix> {
        let dim = tensor_dim(d, self.k)?;
        let mut m = ComplexMatrix::zeros(dim, dim);
        for (g, &coef) in x.iter().enumerate() {
            if coef == C64::new(0.0, 0.0) {
                continue;
            }
            let p = &self.elements[g];
            for c in 0..dim {
                m[(p.permute_index(c, d), c)] += coef;
            }
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transposition_is_flip() {
        let f = perm_operator(&Permutation::transposition(2, 0, 1), 3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(f[(j * 3 + i, i * 3 + j)], C64::new(1.0, 0.0));
            }
        }
    }

    #[test]
    fn homomorphism_and_reversed_product() {
        let g = SymmetricGroup::new(3);
        for s in g.elements() {
            for t in g.elements() {
                let lhs = perm_operator(&s.compose(t), 2).unwrap();
                let rhs = perm_operator(s, 2).unwrap().matmul(&perm_operator(t, 2).unwrap());
                assert_eq!(lhs, rhs);
                // read left to right, "t then s" is represented by π(s)π(t)
                let lr = perm_operator(&Permutation::then(t, s), 2).unwrap();
                assert_eq!(lr, rhs);
            }
        }
    }

    #[test]
    fn trace_counts_cycles() {
        let g = SymmetricGroup::new(3);
        for s in g.elements() {
            let t = perm_operator(s, 2).unwrap().trace();
            assert_eq!(t.re as usize, 2usize.pow(s.num_cycles() as u32));
        }
    }

    #[test]
    fn group_orders_and_inverses() {
        for (k, n) in [(1, 1), (2, 2), (3, 6), (4, 24)] {
            let g = SymmetricGroup::new(k);
            assert_eq!(g.order(), n);
            for a in 0..n {
                assert_eq!(g.product(a, g.inverse(a)), g.index_of(&Permutation::identity(k)));
            }
        }
    }

    #[test]
    fn size_cap() {
        assert!(perm_operator(&Permutation::identity(4), 9).is_err());
        assert!(Permutation::new(vec![0, 0]).is_err());
    }
}
