//! Multi-index arithmetic for jet coordinates.
//!
//! A multi-index `N = (nu_1, ..., nu_p)` records how many times each base
//! coordinate has been differentiated. Ordering is graded lexicographic
//! (total order first, then lexicographic on the counts), which fixes a
//! deterministic enumeration of jet coordinates everywhere downstream.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MultiIndexError {
    #[error("cannot decrement axis {axis}: component is already zero")]
    DecrementBelowZero { axis: usize },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
}

/// Exponent vector indexing a jet coordinate `psi^a_N`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    counts: Vec<u32>,
}

impl MultiIndex {
    pub fn new(counts: Vec<u32>) -> Self {
        assert!(!counts.is_empty(), "multi-index needs at least one axis");
        MultiIndex { counts }
    }

    /// The zero index of dimension `p`.
    pub fn zero(p: usize) -> Self {
        MultiIndex::new(vec![0; p])
    }

    /// The unit index `1_i` (0-based axis).
    pub fn unit(p: usize, axis: usize) -> Self {
        let mut counts = vec![0; p];
        counts[axis] = 1;
        MultiIndex::new(counts)
    }

    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn get(&self, axis: usize) -> u32 {
        self.counts[axis]
    }

    /// `|N|`, the total derivative order.
    pub fn order(&self) -> u32 {
        self.counts.iter().sum()
    }

    /// `N!`, the product of the component factorials.
    pub fn factorial(&self) -> u64 {
        self.counts
            .iter()
            .map(|&c| (1..=c as u64).product::<u64>())
            .product()
    }

    pub fn is_zero(&self) -> bool {
        self.counts.iter().all(|&c| c == 0)
    }

    /// Shift component `axis` by +1 or -1. Decrementing a zero component is
    /// the annihilation case of the order-reducing derivations; the caller
    /// decides what to do with it.
    pub fn shift(&self, axis: usize, delta: i32) -> Result<MultiIndex, MultiIndexError> {
        debug_assert!(delta == 1 || delta == -1);
        let mut counts = self.counts.clone();
        if delta < 0 && counts[axis] == 0 {
            return Err(MultiIndexError::DecrementBelowZero { axis });
        }
        counts[axis] = (counts[axis] as i64 + delta as i64) as u32;
        Ok(MultiIndex::new(counts))
    }

    pub fn incremented(&self, axis: usize) -> MultiIndex {
        self.shift(axis, 1).expect("increment cannot fail")
    }

    /// Componentwise `self <= other`.
    pub fn leq(&self, other: &MultiIndex) -> Result<bool, MultiIndexError> {
        if self.dim() != other.dim() {
            return Err(MultiIndexError::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(self
            .counts
            .iter()
            .zip(&other.counts)
            .all(|(&a, &b)| a <= b))
    }

    /// Componentwise sum.
    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        assert_eq!(self.dim(), other.dim());
        MultiIndex::new(
            self.counts
                .iter()
                .zip(&other.counts)
                .map(|(&a, &b)| a + b)
                .collect(),
        )
    }

    /// All `N` with `|N| <= kmax`, sorted by (order, lexicographic).
    pub fn enumerate(p: usize, kmax: u32) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        for k in 0..=kmax {
            let mut level = Vec::new();
            collect_of_order(p, k, &mut Vec::with_capacity(p), &mut level);
            level.sort_by(|a, b| a.counts.cmp(&b.counts));
            out.extend(level);
        }
        out
    }
}

fn collect_of_order(p: usize, k: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
    if prefix.len() == p - 1 {
        prefix.push(k);
        out.push(MultiIndex::new(prefix.clone()));
        prefix.pop();
        return;
    }
    for c in 0..=k {
        prefix.push(c);
        collect_of_order(p, k - c, prefix, out);
        prefix.pop();
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.order()
            .cmp(&other.order())
            .then_with(|| self.counts.cmp(&other.counts))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.counts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}
