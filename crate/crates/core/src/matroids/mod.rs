//! Matroids behind a uniform independence-oracle interface.
//!
//! Every [`Matroid`] handle carries a shared call counter. Derived matroids
//! (minors, duals, truncations) are lazy wrappers that delegate each query to
//! the matroid they were built from, so the counter of the original handle
//! tallies every independence test ultimately performed on it.

mod concrete;
mod counter;
pub mod spec;

use std::fmt;
use std::sync::Arc;

use smallvec::SmallVec;

pub use self::concrete::{Graphic, Linear, Partition};
pub use self::counter::CallCounter;
pub use self::spec::{parse_matroid, MatroidSpec};
use crate::error::{Error, Result};
use crate::subset::{merge_into, Subset};

type SetBuf = SmallVec<[usize; 32]>;

#[derive(Debug)]
enum Kind {
    Uniform { r: usize },
    Partition(Partition),
    Graphic(Graphic),
    Linear(Linear),
    Truncation { inner: Matroid, k: usize },
    /// Deletion and contraction combined: element `i` of this matroid is
    /// element `map[i]` of `base`, and `contracted` is added to every query.
    Minor { base: Matroid, map: Vec<usize>, contracted: Vec<usize> },
    Dual { inner: Matroid },
}

/// Shared handle to a matroid oracle. Cloning is cheap and shares the counter.
#[derive(Clone)]
pub struct Matroid {
    kind: Arc<Kind>,
    n: usize,
    rank: usize,
    calls: Arc<CallCounter>,
}

impl fmt::Debug for Matroid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(n={}, r={})", self.kind_name(), self.n, self.rank)
    }
}

/// Loops and parallel classes of the non-loop elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParallelClasses {
    pub loops: Subset,
    pub classes: Vec<Subset>,
}

impl Matroid {
    fn build(kind: Kind, n: usize) -> Matroid {
        let mut m = Matroid { kind: Arc::new(kind), n, rank: usize::MAX, calls: Arc::new(CallCounter::default()) };
        m.rank = match &*m.kind {
            Kind::Uniform { r, .. } => *r,
            Kind::Truncation { k, .. } => *k,
            Kind::Dual { inner } => inner.n - inner.rank,
            _ => {
                let all: Vec<usize> = (0..n).collect();
                m.rank_slice(&all)
            }
        };
        m
    }

    pub fn uniform(n: usize, r: usize) -> Result<Matroid> {
        if r > n {
            return Err(Error::input_at("r", format!("rank {r} exceeds ground set size {n}")));
        }
        Ok(Matroid::build(Kind::Uniform { r }, n))
    }

    /// Free matroid: every subset independent.
    pub fn free(n: usize) -> Matroid {
        Matroid::build(Kind::Uniform { r: n }, n)
    }

    pub fn partition(blocks: Vec<Vec<usize>>, caps: Vec<usize>) -> Result<Matroid> {
        let p = Partition::new(blocks, caps)?;
        let n = p.n();
        Ok(Matroid::build(Kind::Partition(p), n))
    }

    pub fn graphic(vertices: usize, edges: Vec<(usize, usize)>) -> Result<Matroid> {
        let g = Graphic::new(vertices, edges)?;
        let n = g.n();
        Ok(Matroid::build(Kind::Graphic(g), n))
    }

    /// Graphic matroid of the complete graph on `v` vertices, edges in
    /// lexicographic order.
    pub fn complete_graph(v: usize) -> Matroid {
        let edges = (0..v).flat_map(|a| (a + 1..v).map(move |b| (a, b))).collect();
        Matroid::graphic(v, edges).expect("complete graph endpoints are in range")
    }

    pub fn linear(field: u64, matrix: &[Vec<i64>]) -> Result<Matroid> {
        let l = Linear::new(field, matrix)?;
        let n = l.n();
        Ok(Matroid::build(Kind::Linear(l), n))
    }

    /// The Fano plane as the column matroid of all nonzero vectors of GF(2)^3.
    pub fn fano() -> Matroid {
        let matrix = vec![vec![1, 0, 0, 1, 1, 0, 1], vec![0, 1, 0, 1, 0, 1, 1], vec![0, 0, 1, 0, 1, 1, 1]];
        Matroid::linear(2, &matrix).expect("fano matrix is well formed")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn kind_name(&self) -> &'static str {
        match &*self.kind {
            Kind::Uniform { .. } => "uniform",
            Kind::Partition(_) => "partition",
            Kind::Graphic(_) => "graphic",
            Kind::Linear(_) => "linear",
            Kind::Truncation { .. } => "truncation",
            Kind::Minor { contracted, .. } if contracted.is_empty() => "delete",
            Kind::Minor { .. } => "minor",
            Kind::Dual { .. } => "dual",
        }
    }

    /// Total independence queries answered by this handle (and its clones).
    pub fn oracle_calls(&self) -> u64 {
        self.calls.total()
    }

    /// Checked independence query.
    pub fn is_independent(&self, set: &Subset) -> Result<bool> {
        set.check_range(self.n)?;
        Ok(self.independent(set.as_slice()))
    }

    /// Independence of a strictly increasing, in-range slice. Counted.
    #[inline]
    pub fn independent(&self, set: &[usize]) -> bool {
        self.calls.bump();
        self.check(set)
    }

    /// Independence of `set ∪ {extra}` where `extra ∉ set`.
    pub fn independent_with(&self, set: &[usize], extra: usize) -> bool {
        let mut buf: SetBuf = SmallVec::with_capacity(set.len() + 1);
        let pos = set.partition_point(|&x| x < extra);
        buf.extend_from_slice(&set[..pos]);
        buf.push(extra);
        buf.extend_from_slice(&set[pos..]);
        self.independent(&buf)
    }

    fn check(&self, set: &[usize]) -> bool {
        match &*self.kind {
            Kind::Uniform { r, .. } => set.len() <= *r,
            Kind::Partition(p) => p.check(set),
            Kind::Graphic(g) => g.check(set),
            Kind::Linear(l) => l.check(set),
            Kind::Truncation { inner, k } => set.len() <= *k && inner.independent(set),
            Kind::Minor { base, map, contracted } => {
                if contracted.is_empty() {
                    let mapped: SetBuf = set.iter().map(|&i| map[i]).collect();
                    base.independent(&mapped)
                } else {
                    let mapped: SetBuf = set.iter().map(|&i| map[i]).collect();
                    let mut merged: SetBuf = SmallVec::with_capacity(mapped.len() + contracted.len());
                    merge_into(&mapped, contracted, &mut merged);
                    base.independent(&merged)
                }
            }
            Kind::Dual { inner } => {
                if set.len() > self.n - inner.rank {
                    return false;
                }
                let mut complement: SetBuf = SmallVec::with_capacity(self.n - set.len());
                let mut j = 0;
                for x in 0..self.n {
                    if j < set.len() && set[j] == x {
                        j += 1;
                    } else {
                        complement.push(x);
                    }
                }
                inner.spans(&complement)
            }
        }
    }

    /// Whether `set` has full rank, scanning greedily and stopping early.
    fn spans(&self, set: &[usize]) -> bool {
        if self.rank == 0 {
            return true;
        }
        let mut kept: SetBuf = SmallVec::new();
        for &e in set {
            if self.independent_with(&kept, e) {
                kept.push(e);
                if kept.len() == self.rank {
                    return true;
                }
            }
        }
        false
    }

    /// Greedy rank: scan in index order and keep each element that stays
    /// independent with what has been kept.
    pub fn rank_of(&self, set: &Subset) -> Result<usize> {
        set.check_range(self.n)?;
        Ok(self.rank_slice(set.as_slice()))
    }

    pub fn rank_slice(&self, set: &[usize]) -> usize {
        self.maximal_independent_subset(set).len()
    }

    /// The greedy maximal independent subset of a sorted slice.
    pub fn maximal_independent_subset(&self, set: &[usize]) -> Vec<usize> {
        let mut kept = Vec::with_capacity(set.len().min(self.rank));
        for &e in set {
            if kept.len() == self.rank {
                break;
            }
            if self.independent_with(&kept, e) {
                kept.push(e);
            }
        }
        kept
    }

    /// Lexicographically first basis.
    pub fn greedy_basis(&self) -> Subset {
        let all: Vec<usize> = (0..self.n).collect();
        Subset::from_sorted(self.maximal_independent_subset(&all))
    }

    /// Contraction `M / S`; `S` must be independent. Elements of the result are
    /// the survivors of `[n] \ S` in increasing order (see [`Matroid::labels`]).
    pub fn contract(&self, set: &Subset) -> Result<Matroid> {
        set.check_range(self.n)?;
        if !self.independent(set.as_slice()) {
            return Err(Error::input(format!("cannot contract dependent set {set:?}")));
        }
        Ok(self.minor(set, true))
    }

    /// Deletion `M \ S`.
    pub fn delete(&self, set: &Subset) -> Result<Matroid> {
        set.check_range(self.n)?;
        Ok(self.minor(set, false))
    }

    fn minor(&self, set: &Subset, contract: bool) -> Matroid {
        let survivors: Vec<usize> = (0..self.n).filter(|&i| !set.contains(i)).collect();
        let (base, map, contracted) = match &*self.kind {
            // Flatten nested minors so queries never pass through a chain of wrappers.
            Kind::Minor { base, map, contracted } => {
                let new_map = survivors.iter().map(|&i| map[i]).collect();
                let mut c = contracted.clone();
                if contract {
                    let mut extra: Vec<usize> = set.iter().map(|i| map[i]).collect();
                    extra.sort_unstable();
                    let mut merged = Vec::with_capacity(c.len() + extra.len());
                    merge_into(&c, &extra, &mut merged);
                    c = merged;
                }
                (base.clone(), new_map, c)
            }
            _ => (self.clone(), survivors, if contract { set.as_slice().to_vec() } else { Vec::new() }),
        };
        let n = map.len();
        let expected_rank = if contract { Some(self.rank - set.len()) } else { None };
        let m = Matroid::build(Kind::Minor { base, map, contracted }, n);
        if let Some(r) = expected_rank {
            debug_assert_eq!(m.rank, r);
        }
        m
    }

    pub fn dual(&self) -> Matroid {
        Matroid::build(Kind::Dual { inner: self.clone() }, self.n)
    }

    /// Truncation to independent sets of size at most `k`.
    pub fn truncate(&self, k: usize) -> Result<Matroid> {
        if k > self.rank {
            return Err(Error::input_at("k", format!("truncation level {k} exceeds rank {}", self.rank)));
        }
        Ok(Matroid::build(Kind::Truncation { inner: self.clone(), k }, self.n))
    }

    /// Vertex count and edge list when this is a graphic matroid itself
    /// (not a minor or other derived matroid).
    pub fn as_graph(&self) -> Option<(usize, &[(usize, usize)])> {
        match &*self.kind {
            Kind::Graphic(g) => Some((g.vertices, &g.edges)),
            _ => None,
        }
    }

    /// For minors, the index in the innermost non-minor matroid of each
    /// element; the identity otherwise.
    pub fn labels(&self) -> Vec<usize> {
        match &*self.kind {
            Kind::Minor { map, .. } => map.clone(),
            _ => (0..self.n).collect(),
        }
    }

    pub fn parallel_classes(&self) -> ParallelClasses {
        let loops: Vec<usize> = (0..self.n).filter(|&i| !self.independent(&[i])).collect();
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for i in (0..self.n).filter(|i| loops.binary_search(i).is_err()) {
            // Parallelism is an equivalence relation on non-loops, so one
            // representative per class suffices.
            match classes.iter_mut().find(|c| !self.independent(&[c[0], i])) {
                Some(c) => c.push(i),
                None => classes.push(vec![i]),
            }
        }
        ParallelClasses {
            loops: Subset::from_sorted(loops),
            classes: classes.into_iter().map(Subset::from_sorted).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[usize]) -> Subset {
        Subset::new(v.to_vec()).unwrap()
    }

    fn all_subsets(n: usize) -> impl Iterator<Item = Subset> {
        (0u64..1 << n).map(Subset::from_mask)
    }

    fn same_matroid(a: &Matroid, b: &Matroid) -> bool {
        a.n() == b.n() && all_subsets(a.n()).all(|t| a.independent(t.as_slice()) == b.independent(t.as_slice()))
    }

    #[test]
    fn independence_examples() {
        let u24 = Matroid::uniform(4, 2).unwrap();
        assert!(u24.is_independent(&s(&[0, 1])).unwrap());
        let k4 = Matroid::complete_graph(4);
        // Edges (0,1), (0,2), (1,2) form a triangle.
        assert!(!k4.is_independent(&s(&[0, 1, 3])).unwrap());
        let fano = Matroid::fano();
        // Columns e1, e2, e1+e2 lie on a line.
        assert!(!fano.is_independent(&s(&[0, 1, 3])).unwrap());
        assert!(fano.is_independent(&s(&[0, 1, 2])).unwrap());
        assert!(u24.is_independent(&s(&[4])).is_err());
    }

    #[test]
    fn rank_examples() {
        let k4 = Matroid::complete_graph(4);
        assert_eq!(k4.rank_of(&Subset::full(6)).unwrap(), 3);
        let u24 = Matroid::uniform(4, 2).unwrap();
        assert_eq!(u24.rank_of(&s(&[0, 1, 2])).unwrap(), 2);
        assert_eq!(k4.rank_of(&Subset::empty()).unwrap(), 0);
        assert_eq!(Matroid::fano().rank(), 3);
    }

    #[test]
    fn greedy_basis_examples() {
        assert_eq!(Matroid::uniform(4, 2).unwrap().greedy_basis(), s(&[0, 1]));
        let path = Matroid::graphic(4, vec![(0, 1), (1, 2), (2, 3)]).unwrap();
        assert_eq!(path.greedy_basis(), s(&[0, 1, 2]));
        let part = Matroid::partition(vec![vec![0, 1], vec![2, 3]], vec![1, 1]).unwrap();
        assert_eq!(part.greedy_basis(), s(&[0, 2]));
    }

    #[test]
    fn contraction_examples() {
        let u24 = Matroid::uniform(4, 2).unwrap();
        let c = u24.contract(&s(&[0])).unwrap();
        assert!(same_matroid(&c, &Matroid::uniform(3, 1).unwrap()));
        assert_eq!(c.labels(), vec![1, 2, 3]);

        // K4 / (0,1): vertices {01, 2, 3}; remaining edges 02,03,12,13,23 become
        // (a,2),(a,3),(a,2),(a,3),(2,3).
        let k4 = Matroid::complete_graph(4);
        let k4e = k4.contract(&s(&[0])).unwrap();
        let expect = Matroid::graphic(3, vec![(0, 1), (0, 2), (0, 1), (0, 2), (1, 2)]).unwrap();
        assert!(same_matroid(&k4e, &expect));
        assert_eq!(k4e.rank(), 2);

        assert!(same_matroid(&k4.contract(&Subset::empty()).unwrap(), &k4));
        assert!(u24.contract(&s(&[0, 1, 2])).is_err());
    }

    #[test]
    fn deletion_examples() {
        let u24 = Matroid::uniform(4, 2).unwrap();
        assert!(same_matroid(&u24.delete(&s(&[3])).unwrap(), &Matroid::uniform(3, 2).unwrap()));
        assert!(same_matroid(&u24.delete(&Subset::empty()).unwrap(), &u24));
        let k4 = Matroid::complete_graph(4);
        let d = k4.delete(&s(&[0])).unwrap();
        let expect = Matroid::graphic(4, vec![(0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        assert!(same_matroid(&d, &expect));
    }

    #[test]
    fn nested_minors_flatten_and_agree() {
        let k5 = Matroid::complete_graph(5);
        let once = k5.contract(&s(&[0])).unwrap().delete(&s(&[2])).unwrap().contract(&s(&[4])).unwrap();
        assert_eq!(once.kind_name(), "minor");
        // Contracting index 0, deleting index 2, then contracting index 4
        // amounts to contracting edges {0, 6} and deleting edge 3 of K5.
        let labels = once.labels();
        assert_eq!(labels, vec![1, 2, 4, 5, 7, 8, 9]);
        for t in all_subsets(once.n()) {
            let mut base: Vec<usize> = t.iter().map(|i| labels[i]).collect();
            base.extend([0, 6]);
            let base = Subset::new(base).unwrap();
            assert_eq!(once.independent(t.as_slice()), k5.independent(base.as_slice()));
        }
    }

    #[test]
    fn dual_examples() {
        let u24 = Matroid::uniform(4, 2).unwrap();
        assert!(same_matroid(&u24.dual(), &u24));
        let free = Matroid::free(3);
        let d = free.dual();
        assert_eq!(d.rank(), 0);
        assert!(all_subsets(3).all(|t| d.independent(t.as_slice()) == t.is_empty()));
        let k4 = Matroid::complete_graph(4);
        assert!(same_matroid(&k4.dual().dual(), &k4));
    }

    #[test]
    fn truncation_examples() {
        let u35 = Matroid::uniform(5, 3).unwrap();
        assert!(same_matroid(&u35.truncate(2).unwrap(), &Matroid::uniform(5, 2).unwrap()));
        let k4 = Matroid::complete_graph(4);
        assert!(same_matroid(&k4.truncate(3).unwrap(), &k4));
        let t = k4.truncate(2).unwrap();
        let bases = crate::subset::k_subsets(6, 2).filter(|b| t.independent(b.as_slice())).count();
        assert_eq!(bases, 15);
        assert!(k4.truncate(4).is_err());
    }

    #[test]
    fn parallel_class_examples() {
        let u24 = Matroid::uniform(4, 2).unwrap();
        let pc = u24.parallel_classes();
        assert!(pc.loops.is_empty());
        assert_eq!(pc.classes.len(), 4);

        let triple = Matroid::graphic(2, vec![(0, 1), (0, 1), (0, 1)]).unwrap();
        let pc = triple.parallel_classes();
        assert_eq!(pc.classes, vec![s(&[0, 1, 2])]);

        let with_loop = Matroid::graphic(2, vec![(0, 1), (1, 0), (1, 1)]).unwrap();
        let pc = with_loop.parallel_classes();
        assert_eq!(pc.loops, s(&[2]));
        assert_eq!(pc.classes, vec![s(&[0, 1])]);
    }

    #[test]
    fn counter_is_shared_by_clones_and_fed_by_wrappers() {
        let k4 = Matroid::complete_graph(4);
        let before = k4.oracle_calls();
        let c = k4.clone().contract(&s(&[0])).unwrap();
        let mid = k4.oracle_calls();
        c.independent(&[0, 1]);
        assert_eq!(c.oracle_calls(), c.oracle_calls());
        assert!(k4.oracle_calls() > mid && mid > before);
    }
}
