//! Sorted, duplicate-free sets of ground-set indices.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite subset of `{0, 1, ..., n-1}` stored as a strictly increasing list.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Subset(Vec<usize>);

impl Subset {
    pub fn empty() -> Self {
        Subset(Vec::new())
    }

    /// Builds a subset from arbitrary indices, sorting and rejecting duplicates.
    pub fn new(mut elements: Vec<usize>) -> Result<Self> {
        elements.sort_unstable();
        if let Some(w) = elements.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::input(format!("duplicate element {}", w[0])));
        }
        Ok(Subset(elements))
    }

    /// Wraps a list that the caller guarantees is strictly increasing.
    pub fn from_sorted(elements: Vec<usize>) -> Self {
        debug_assert!(elements.windows(2).all(|w| w[0] < w[1]), "not strictly increasing: {elements:?}");
        Subset(elements)
    }

    pub fn full(n: usize) -> Self {
        Subset((0..n).collect())
    }

    pub fn singleton(i: usize) -> Self {
        Subset(vec![i])
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn is_subset_of(&self, other: &Subset) -> bool {
        is_sorted_subset(&self.0, &other.0)
    }

    pub fn is_disjoint(&self, other: &Subset) -> bool {
        let (mut a, mut b) = (0, 0);
        while a < self.0.len() && b < other.0.len() {
            match self.0[a].cmp(&other.0[b]) {
                std::cmp::Ordering::Less => a += 1,
                std::cmp::Ordering::Greater => b += 1,
                std::cmp::Ordering::Equal => return false,
            }
        }
        true
    }

    pub fn with(&self, i: usize) -> Subset {
        let mut v = self.0.clone();
        match v.binary_search(&i) {
            Ok(_) => {}
            Err(pos) => v.insert(pos, i),
        }
        Subset(v)
    }

    pub fn without(&self, i: usize) -> Subset {
        Subset(self.0.iter().copied().filter(|&x| x != i).collect())
    }

    pub fn union(&self, other: &Subset) -> Subset {
        let mut v = Vec::with_capacity(self.len() + other.len());
        merge_into(&self.0, &other.0, &mut v);
        Subset(v)
    }

    pub fn intersection(&self, other: &Subset) -> Subset {
        Subset(self.0.iter().copied().filter(|&x| other.contains(x)).collect())
    }

    pub fn difference(&self, other: &Subset) -> Subset {
        Subset(self.0.iter().copied().filter(|&x| !other.contains(x)).collect())
    }

    /// Complement within `{0, ..., n-1}`.
    pub fn complement(&self, n: usize) -> Subset {
        Subset((0..n).filter(|&x| !self.contains(x)).collect())
    }

    /// Fails unless every element is below `n`.
    pub fn check_range(&self, n: usize) -> Result<()> {
        match self.0.last() {
            Some(&max) if max >= n => {
                Err(Error::input(format!("element {max} out of range for ground set of size {n}")))
            }
            _ => Ok(()),
        }
    }

    /// Subset encoded by the set bits of `mask`.
    pub fn from_mask(mask: u64) -> Subset {
        let mut v = Vec::with_capacity(mask.count_ones() as usize);
        let mut m = mask;
        while m != 0 {
            v.push(m.trailing_zeros() as usize);
            m &= m - 1;
        }
        Subset(v)
    }

    pub fn to_mask(&self) -> u64 {
        self.0.iter().fold(0u64, |m, &i| m | (1u64 << i))
    }
}

impl fmt::Debug for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, x) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "}}")
    }
}

impl std::borrow::Borrow<[usize]> for Subset {
    fn borrow(&self) -> &[usize] {
        &self.0
    }
}

impl From<Subset> for Vec<usize> {
    fn from(s: Subset) -> Self {
        s.0
    }
}

impl<'a> IntoIterator for &'a Subset {
    type Item = &'a usize;
    type IntoIter = std::slice::Iter<'a, usize>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

pub(crate) fn is_sorted_subset(a: &[usize], b: &[usize]) -> bool {
    let mut j = 0;
    for &x in a {
        while j < b.len() && b[j] < x {
            j += 1;
        }
        if j == b.len() || b[j] != x {
            return false;
        }
        j += 1;
    }
    true
}

/// Merges two strictly increasing slices into `out` (cleared first). Shared
/// elements appear once.
pub(crate) fn merge_into<E: Extend<usize>>(a: &[usize], b: &[usize], out: &mut E) {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] < b[j] {
            out.extend(Some(a[i]));
            i += 1;
        } else if b[j] < a[i] {
            out.extend(Some(b[j]));
            j += 1;
        } else {
            out.extend(Some(a[i]));
            i += 1;
            j += 1;
        }
    }
    out.extend(a[i..].iter().copied());
    out.extend(b[j..].iter().copied());
}

/// All `k`-subsets of `{0, ..., n-1}` in lexicographic order.
pub fn k_subsets(n: usize, k: usize) -> KSubsets {
    KSubsets { n, current: if k <= n { Some((0..k).collect()) } else { None } }
}

pub struct KSubsets {
    n: usize,
    current: Option<Vec<usize>>,
}

impl Iterator for KSubsets {
    type Item = Subset;

    fn next(&mut self) -> Option<Subset> {
        let cur = self.current.take()?;
        let out = Subset(cur.clone());
        let k = cur.len();
        let mut next = cur;
        let mut i = k;
        while i > 0 {
            i -= 1;
            if next[i] < self.n - k + i {
                next[i] += 1;
                for j in i + 1..k {
                    next[j] = next[j - 1] + 1;
                }
                self.current = Some(next);
                return Some(out);
            }
        }
        Some(out)
    }
}

/// Binomial coefficient as a float (exact for the sizes used here).
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// Natural log of the binomial coefficient.
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    (0..k).map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_sorts() {
        assert_eq!(Subset::new(vec![3, 1, 2]).unwrap().as_slice(), &[1, 2, 3]);
        assert!(Subset::new(vec![1, 1]).is_err());
    }

    #[test]
    fn k_subsets_enumerates_binomial_many() {
        assert_eq!(k_subsets(6, 3).count(), 20);
        assert_eq!(k_subsets(4, 0).count(), 1);
        assert_eq!(k_subsets(3, 4).count(), 0);
        let all: Vec<_> = k_subsets(4, 2).collect();
        assert_eq!(all[0].as_slice(), &[0, 1]);
        assert_eq!(all[5].as_slice(), &[2, 3]);
    }

    #[test]
    fn set_algebra() {
        let a = Subset::from_sorted(vec![0, 2, 4]);
        let b = Subset::from_sorted(vec![2, 3]);
        assert_eq!(a.union(&b).as_slice(), &[0, 2, 3, 4]);
        assert_eq!(a.intersection(&b).as_slice(), &[2]);
        assert_eq!(a.difference(&b).as_slice(), &[0, 4]);
        assert_eq!(a.complement(5).as_slice(), &[1, 3]);
        assert!(!a.is_disjoint(&b));
        assert!(Subset::from_sorted(vec![2]).is_subset_of(&a));
        assert_eq!(Subset::from_mask(a.to_mask()), a);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(10, 5), 252.0);
        assert!((ln_binomial(7, 3) - 35f64.ln()).abs() < 1e-12);
    }
}
