use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `k` with a built-in character table.
pub const MAX_DEGREE: usize = 4;

/// Integer partition with non-increasing positive parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Partition(Vec<usize>);

impl Partition {
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.contains(&0) || parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidInput(format!("{parts:?} is not a partition")));
        }
        Ok(Self(parts))
    }

    pub(crate) fn from_unsorted(mut parts: Vec<usize>) -> Self {
        parts.sort_unstable_by(|a, b| b.cmp(a));
        parts.retain(|&p| p > 0);
        Self(parts)
    }

    pub fn parts(&self) -> &[usize] {
        &self.0
    }

    /// Number of rows.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn size(&self) -> usize {
        self.0.iter().sum()
    }

    /// Dimension of the Specht module, by the hook length formula.
    pub fn specht_dim(&self) -> usize {
        let k = self.size();
        let conj: Vec<usize> = (0..self.0.first().copied().unwrap_or(0))
            .map(|c| self.0.iter().filter(|&&r| r > c).count())
            .collect();
        let mut hooks = 1usize;
        for (i, &row) in self.0.iter().enumerate() {
            for (j, &col) in conj.iter().enumerate().take(row) {
                hooks *= (row - j - 1) + (col - i - 1) + 1;
            }
        }
        (1..=k).product::<usize>() / hooks
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|p| p.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Partitions of `k` with at most `max_rows` parts, lexicographically
/// descending.
pub fn partitions(k: usize, max_rows: usize) -> Vec<Partition> {
    fn rec(rem: usize, max_part: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rem == 0 {
            out.push(cur.clone());
            return;
        }
        for p in (1..=rem.min(max_part)).rev() {
            cur.push(p);
            rec(rem - p, p, cur, out);
            cur.pop();
        }
    }
    let mut all = Vec::new();
    rec(k, k, &mut Vec::new(), &mut all);
    all.into_iter().filter(|p| p.len() <= max_rows).map(Partition).collect()
}

/// Irreducible characters of `S_k` indexed by (irrep, conjugacy class), both
/// labelled by partitions; classes are cycle types.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharacterTable {
    pub k: usize,
    pub irreps: Vec<Partition>,
    pub classes: Vec<Partition>,
    pub values: Vec<Vec<i64>>,
}

fn p(parts: &[usize]) -> Partition {
    Partition(parts.to_vec())
}

impl CharacterTable {
    pub fn standard(k: usize) -> Result<Self> {
        let (irreps, classes, values) = match k {
            1 => (vec![p(&[1])], vec![p(&[1])], vec![vec![1]]),
            2 => (
                vec![p(&[2]), p(&[1, 1])],
                vec![p(&[1, 1]), p(&[2])],
                vec![vec![1, 1], vec![1, -1]],
            ),
            3 => (
                vec![p(&[3]), p(&[2, 1]), p(&[1, 1, 1])],
                vec![p(&[1, 1, 1]), p(&[2, 1]), p(&[3])],
                vec![vec![1, 1, 1], vec![2, 0, -1], vec![1, -1, 1]],
            ),
            4 => (
                vec![p(&[4]), p(&[3, 1]), p(&[2, 2]), p(&[2, 1, 1]), p(&[1, 1, 1, 1])],
                vec![p(&[1, 1, 1, 1]), p(&[2, 1, 1]), p(&[2, 2]), p(&[3, 1]), p(&[4])],
                vec![
                    vec![1, 1, 1, 1, 1],
                    vec![3, 1, -1, 0, -1],
                    vec![2, 0, 2, -1, 0],
                    vec![3, -1, -1, 0, 1],
                    vec![1, -1, 1, 1, -1],
                ],
            ),
            _ => {
                return Err(Error::SizeCap {
                    what: "symmetric group degree",
                    limit: MAX_DEGREE,
                    requested: k,
                })
            }
        };
        Ok(Self {
            k,
            irreps,
            classes,
            values,
        })
    }

    /// `χ^λ` on the class with cycle type `class`.
    pub fn value(&self, irrep: &Partition, class: &Partition) -> Result<i64> {
        let r = self
            .irreps
            .iter()
            .position(|x| x == irrep)
            .ok_or_else(|| Error::InvalidInput(format!("unknown irrep {irrep}")))?;
        let c = self
            .classes
            .iter()
            .position(|x| x == class)
            .ok_or_else(|| Error::InvalidInput(format!("unknown class {class}")))?;
        Ok(self.values[r][c])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn listing() {
        assert_eq!(partitions(2, 2), vec![p(&[2]), p(&[1, 1])]);
        assert_eq!(partitions(4, 4).len(), 5);
        assert_eq!(partitions(4, 2), vec![p(&[4]), p(&[3, 1]), p(&[2, 2])]);
        assert_eq!(CharacterTable::standard(4).unwrap().irreps, partitions(4, 4));
    }

    #[test]
    fn identity_column_is_hook_dimension() {
        for k in 1..=4 {
            let t = CharacterTable::standard(k).unwrap();
            let e = Partition(vec![1; k]);
            let mut sum_sq = 0;
            for lam in &t.irreps {
                let dim = lam.specht_dim();
                assert_eq!(t.value(lam, &e).unwrap(), dim as i64);
                sum_sq += dim * dim;
            }
            assert_eq!(sum_sq, (1..=k).product::<usize>());
        }
    }

    #[test]
    fn rejects_bad_parts() {
        assert!(Partition::new(vec![1, 2]).is_err());
        assert!(Partition::new(vec![2, 0]).is_err());
        assert!(CharacterTable::standard(5).is_err());
    }
}
