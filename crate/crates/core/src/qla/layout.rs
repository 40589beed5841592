use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerance::TOL;

/// A labeled tensor factor.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Subsystem {
    pub label: String,
    pub dim: usize,
}

impl Subsystem {
    pub fn new(label: impl Into<String>, dim: usize) -> Self {
        Self { label: label.into(), dim }
    }
}

/// Ordered list of labeled subsystems. The first subsystem is the most significant
/// digit of the row-major basis index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Subsystem>", into = "Vec<Subsystem>")]
pub struct SystemLayout {
    subsystems: Vec<Subsystem>,
}

impl TryFrom<Vec<Subsystem>> for SystemLayout {
    type Error = Error;

    fn try_from(subsystems: Vec<Subsystem>) -> Result<Self> {
        SystemLayout::new(subsystems)
    }
}

impl From<SystemLayout> for Vec<Subsystem> {
    fn from(layout: SystemLayout) -> Self {
        layout.subsystems
    }
}

impl SystemLayout {
    pub fn new(subsystems: Vec<Subsystem>) -> Result<Self> {
        for (i, s) in subsystems.iter().enumerate() {
            if s.dim == 0 {
                return Err(Error::Labeling(format!("subsystem `{}` has dimension 0", s.label)));
            }
            if subsystems[..i].iter().any(|t| t.label == s.label) {
                return Err(Error::Labeling(format!("duplicate label `{}`", s.label)));
            }
        }
        let layout = Self { subsystems };
        let dim = layout.checked_total_dim().ok_or(Error::DimensionGuard {
            dim: usize::MAX,
            limit: TOL.max_dim,
        })?;
        if dim > TOL.max_dim {
            return Err(Error::DimensionGuard { dim, limit: TOL.max_dim });
        }
        Ok(layout)
    }

    /// Convenience constructor from `(label, dim)` pairs.
    pub fn from_pairs<S: AsRef<str>>(pairs: &[(S, usize)]) -> Result<Self> {
        Self::new(pairs.iter().map(|(l, d)| Subsystem::new(l.as_ref(), *d)).collect())
    }

    /// A layout with no subsystems (dimension one).
    pub fn empty() -> Self {
        Self { subsystems: Vec::new() }
    }

    fn checked_total_dim(&self) -> Option<usize> {
        self.subsystems.iter().try_fold(1usize, |acc, s| acc.checked_mul(s.dim))
    }

    pub fn total_dim(&self) -> usize {
        self.subsystems.iter().map(|s| s.dim).product()
    }

    pub fn subsystems(&self) -> &[Subsystem] {
        &self.subsystems
    }

    pub fn len(&self) -> usize {
        self.subsystems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsystems.is_empty()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.subsystems.iter().map(|s| s.label.as_str()).collect()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.subsystems.iter().map(|s| s.dim).collect()
    }

    pub fn contains(&self, label: &str) -> bool {
        self.position(label).is_some()
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.subsystems.iter().position(|s| s.label == label)
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        self.position(label)
            .map(|p| self.subsystems[p].dim)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    /// Positions of `labels`, in the order given.
    pub fn positions<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(labels.len());
        for l in labels {
            let p = self
                .position(l.as_ref())
                .ok_or_else(|| Error::UnknownLabel(l.as_ref().to_string()))?;
            if out.contains(&p) {
                return Err(Error::Labeling(format!("label `{}` listed twice", l.as_ref())));
            }
            out.push(p);
        }
        Ok(out)
    }

    /// Concatenation; fails on shared labels.
    pub fn concat(&self, other: &SystemLayout) -> Result<SystemLayout> {
        let mut subs = self.subsystems.clone();
        subs.extend(other.subsystems.iter().cloned());
        SystemLayout::new(subs)
    }

    /// Sub-layout made of the given positions, in the given order.
    pub fn select(&self, positions: &[usize]) -> SystemLayout {
        SystemLayout {
            subsystems: positions.iter().map(|&p| self.subsystems[p].clone()).collect(),
        }
    }

    /// Dims and labels match exactly, in order.
    pub fn same_as(&self, other: &SystemLayout) -> bool {
        self == other
    }

    /// Same multiset of `(label, dim)` pairs, ignoring order.
    pub fn same_systems(&self, other: &SystemLayout) -> bool {
        self.len() == other.len()
            && self
                .subsystems
                .iter()
                .all(|s| other.subsystems.iter().any(|t| t == s))
    }

    /// Mixed-radix digits of a flat basis index.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut digits = vec![0; self.len()];
        for (k, s) in self.subsystems.iter().enumerate().rev() {
            digits[k] = index % s.dim;
            index /= s.dim;
        }
        digits
    }

    /// Flat basis index of mixed-radix digits.
    pub fn index(&self, digits: &[usize]) -> usize {
        digits
            .iter()
            .zip(&self.subsystems)
            .fold(0, |acc, (&d, s)| acc * s.dim + d)
    }

    /// `map[new_index] = old_index` when the subsystems are reordered so that
    /// new position `k` holds old position `order[k]`.
    pub(crate) fn permutation_map(&self, order: &[usize]) -> Vec<usize> {
        let dims = self.dims();
        let new_dims: Vec<usize> = order.iter().map(|&p| dims[p]).collect();
        let total = self.total_dim();
        // strides of the old layout
        let mut strides = vec![1usize; dims.len()];
        for k in (0..dims.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * dims[k + 1];
        }
        let mut map = Vec::with_capacity(total);
        let mut digits = vec![0usize; new_dims.len()];
        for _ in 0..total {
            let old: usize = digits.iter().zip(order).map(|(&d, &p)| d * strides[p]).sum();
            map.push(old);
            for k in (0..digits.len()).rev() {
                digits[k] += 1;
                if digits[k] < new_dims[k] {
                    break;
                }
                digits[k] = 0;
            }
        }
        map
    }
}

/// Labels for `n` copies of a layout: `A` becomes `A_1, ..., A_n`.
pub fn copy_label(label: &str, copy: usize) -> String {
    format!("{label}_{}", copy + 1)
}

/// Labels of all `n` copies of `label`.
pub fn copy_labels(label: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| copy_label(label, i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_zero_dims() {
        assert!(matches!(
            SystemLayout::from_pairs(&[("A", 2), ("A", 2)]),
            Err(Error::Labeling(_))
        ));
        assert!(SystemLayout::from_pairs(&[("A", 0)]).is_err());
    }

    #[test]
    fn guard_refuses_large_layouts() {
        let err = SystemLayout::from_pairs(&[("A", 64), ("B", 65)]).unwrap_err();
        assert!(err.is_guard());
        assert!(SystemLayout::from_pairs(&[("A", 64), ("B", 64)]).is_ok());
    }

    #[test]
    fn digits_round_trip() {
        let l = SystemLayout::from_pairs(&[("A", 2), ("B", 3), ("C", 4)]).unwrap();
        for i in 0..l.total_dim() {
            assert_eq!(l.index(&l.digits(i)), i);
        }
        assert_eq!(l.digits(23), vec![1, 2, 3]);
    }

    #[test]
    fn permutation_map_swaps_factors() {
        let l = SystemLayout::from_pairs(&[("A", 2), ("B", 3)]).unwrap();
        let map = l.permutation_map(&[1, 0]);
        // new index (b, a) = b*2 + a maps to old a*3 + b
        for b in 0..3 {
            for a in 0..2 {
                assert_eq!(map[b * 2 + a], a * 3 + b);
            }
        }
    }
}
