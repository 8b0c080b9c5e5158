use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An n-tuple of non-negative integers `m = (m₁, …, m_n)` with order
/// `|m| = Σ mᵢ`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Domain("multi-index must have dimension >= 1".into()));
        }
        Ok(Self(entries))
    }

    pub fn zero(n: usize) -> Self {
        Self(vec![0; n.max(1)])
    }

    /// `(k, 0, …, 0)` in dimension `n`.
    pub fn first_axis(n: usize, k: u32) -> Self {
        let mut v = vec![0; n.max(1)];
        v[0] = k;
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn check_dim(&self, n: usize) -> Result<()> {
        if self.dim() == n {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: n,
                got: self.dim(),
            })
        }
    }

    /// Every multi-index of dimension `n` with `|m| = order`, in
    /// lexicographically decreasing order (so `(order, 0, …)` comes first).
    pub fn all_of_order(n: usize, order: u32) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut cur = vec![0u32; n];
        fill(&mut cur, 0, order, &mut out);
        out
    }

    /// Every multi-index of dimension `n` with `|m| ≤ max_order`.
    pub fn all_up_to(n: usize, max_order: u32) -> Vec<MultiIndex> {
        (0..=max_order).flat_map(|k| Self::all_of_order(n, k)).collect()
    }

    /// Component-wise doubling, `2m`.
    pub fn doubled(&self) -> MultiIndex {
        Self(self.0.iter().map(|&m| 2 * m).collect())
    }
}

fn fill(cur: &mut Vec<u32>, pos: usize, remaining: u32, out: &mut Vec<MultiIndex>) {
    let n = cur.len();
    if pos + 1 == n {
        cur[pos] = remaining;
        out.push(MultiIndex(cur.clone()));
        return;
    }
    for k in (0..=remaining).rev() {
        cur[pos] = k;
        fill(cur, pos + 1, remaining - k, out);
    }
    cur[pos] = 0;
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, m) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{m}")?;
        }
        write!(f, ")")
    }
}
