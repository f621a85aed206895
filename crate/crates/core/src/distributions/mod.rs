//! Homogeneous weight functions on `d`-subsets of a ground set `[n]`.
//!
//! Weights live in natural-log space throughout: the random-cluster layer
//! carries a factor `q^{-rank}` whose dynamic range grows like `e^{r |log q|}`.

mod dpp;
mod explicit;
pub mod spec;

use crate::error::{Error, Result};
use crate::logspace::LogWeight;
use crate::matroids::Matroid;
use crate::subset::{merge_into, Subset};

pub use self::dpp::DppKernel;
pub use self::explicit::ExplicitPolynomial;
pub use self::spec::{parse_distribution, DistributionSpec};

#[derive(Debug, Clone)]
pub enum HomogeneousDistribution {
    /// `μ(B) = λ^B` on the bases of `matroid`.
    UniformBases { matroid: Matroid, log_lambda: Vec<f64> },
    /// `μ(S) = q^{-rank(S)} λ^S` on all `k`-subsets.
    ClusterLayer { matroid: Matroid, k: usize, log_q: f64, log_lambda: Vec<f64> },
    /// `μ(S) = det(L_S)^α` on `k`-subsets with a positive principal minor.
    DppAlpha { kernel: DppKernel, k: usize, alpha: f64 },
    Explicit(ExplicitPolynomial),
}

fn check_lambda(n: usize, lambda: Option<Vec<f64>>) -> Result<Vec<f64>> {
    let Some(lambda) = lambda else { return Ok(vec![0.0; n]) };
    if lambda.len() != n {
        return Err(Error::input_at("lambda", format!("{} weights given for {n} elements", lambda.len())));
    }
    lambda
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            if x.is_finite() && x > 0.0 {
                Ok(x.ln())
            } else {
                Err(Error::input_at(format!("lambda[{i}]"), format!("external field {x} must be positive and finite")))
            }
        })
        .collect()
}

fn sum_at(log_lambda: &[f64], set: &[usize]) -> f64 {
    set.iter().map(|&i| log_lambda[i]).sum()
}

fn without(v: &[f64], e: usize) -> Vec<f64> {
    v.iter().enumerate().filter(|&(i, _)| i != e).map(|(_, &x)| x).collect()
}

impl HomogeneousDistribution {
    pub fn uniform_bases(matroid: Matroid, lambda: Option<Vec<f64>>) -> Result<Self> {
        let log_lambda = check_lambda(matroid.n(), lambda)?;
        Ok(HomogeneousDistribution::UniformBases { matroid, log_lambda })
    }

    pub fn cluster_layer(matroid: Matroid, k: usize, q: f64, lambda: Option<Vec<f64>>) -> Result<Self> {
        if !(q > 0.0 && q <= 1.0) {
            return Err(Error::input_at("q", format!("q = {q} outside (0, 1]")));
        }
        if k > matroid.n() {
            return Err(Error::input_at("k", format!("layer {k} exceeds ground set size {}", matroid.n())));
        }
        let log_lambda = check_lambda(matroid.n(), lambda)?;
        Ok(HomogeneousDistribution::ClusterLayer { matroid, k, log_q: q.ln(), log_lambda })
    }

    pub fn dpp_alpha(kernel: DppKernel, k: usize, alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::input_at("alpha", format!("exponent {alpha} outside [0, 1]")));
        }
        if k > kernel.n() {
            return Err(Error::input_at("k", format!("subset size {k} exceeds kernel size {}", kernel.n())));
        }
        Ok(HomogeneousDistribution::DppAlpha { kernel, k, alpha })
    }

    pub fn explicit(p: ExplicitPolynomial) -> Result<Self> {
        if p.is_zero() {
            return Err(Error::input_at("terms", "polynomial has no positive coefficient"));
        }
        Ok(HomogeneousDistribution::Explicit(p))
    }

    pub fn n(&self) -> usize {
        match self {
            HomogeneousDistribution::UniformBases { matroid, .. } | HomogeneousDistribution::ClusterLayer { matroid, .. } => {
                matroid.n()
            }
            HomogeneousDistribution::DppAlpha { kernel, .. } => kernel.n(),
            HomogeneousDistribution::Explicit(p) => p.n(),
        }
    }

    pub fn d(&self) -> usize {
        match self {
            HomogeneousDistribution::UniformBases { matroid, .. } => matroid.rank(),
            HomogeneousDistribution::ClusterLayer { k, .. } | HomogeneousDistribution::DppAlpha { k, .. } => *k,
            HomogeneousDistribution::Explicit(p) => p.d(),
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            HomogeneousDistribution::UniformBases { .. } => "uniform_bases",
            HomogeneousDistribution::ClusterLayer { .. } => "cluster_layer",
            HomogeneousDistribution::DppAlpha { .. } => "dpp_alpha",
            HomogeneousDistribution::Explicit(_) => "explicit",
        }
    }

    pub fn matroid(&self) -> Option<&Matroid> {
        match self {
            HomogeneousDistribution::UniformBases { matroid, .. } | HomogeneousDistribution::ClusterLayer { matroid, .. } => {
                Some(matroid)
            }
            _ => None,
        }
    }

    /// Independence queries made so far through the underlying matroid.
    pub fn oracle_calls(&self) -> u64 {
        self.matroid().map_or(0, Matroid::oracle_calls)
    }

    pub fn log_weight(&self, set: &Subset) -> Result<LogWeight> {
        set.check_range(self.n())?;
        if set.len() != self.d() {
            return Err(Error::input(format!("set {set:?} has size {}, expected {}", set.len(), self.d())));
        }
        Ok(LogWeight(self.log_weight_slice(set.as_slice())))
    }

    /// Log-weight of a strictly increasing, in-range slice of size `d`.
    pub fn log_weight_slice(&self, set: &[usize]) -> f64 {
        match self {
            HomogeneousDistribution::UniformBases { matroid, log_lambda } => {
                if matroid.independent(set) {
                    sum_at(log_lambda, set)
                } else {
                    f64::NEG_INFINITY
                }
            }
            HomogeneousDistribution::ClusterLayer { matroid, log_q, log_lambda, .. } => {
                -(matroid.rank_slice(set) as f64) * log_q + sum_at(log_lambda, set)
            }
            HomogeneousDistribution::DppAlpha { kernel, alpha, .. } => {
                let ld = kernel.log_det(set);
                if ld == f64::NEG_INFINITY {
                    ld
                } else {
                    alpha * ld
                }
            }
            HomogeneousDistribution::Explicit(p) => {
                p.coeff_map().get(set).map_or(f64::NEG_INFINITY, |c| c.ln())
            }
        }
    }

    /// Elements `j ∉ T` with `T ∪ {j}` extendable to the support, each with a
    /// log-weight. When `|T| = d − 1` the weight is exactly
    /// `log μ(T ∪ {j})`; for smaller `T` it is the same formula evaluated on
    /// the partial set (for explicit polynomials, the log of the summed
    /// coefficients of all support members containing `T ∪ {j}`).
    ///
    /// `t` must be strictly increasing and in range; `out` is cleared first.
    pub fn candidates_into(&self, t: &[usize], out: &mut Vec<(usize, f64)>) {
        out.clear();
        let n = self.n();
        if t.len() >= self.d() {
            return;
        }
        let mut next = t.iter().copied().peekable();
        let outside = (0..n).filter(move |&j| {
            while next.peek().is_some_and(|&x| x < j) {
                next.next();
            }
            next.peek() != Some(&j)
        });
        match self {
            HomogeneousDistribution::UniformBases { matroid, log_lambda } => {
                let base = sum_at(log_lambda, t);
                for j in outside {
                    if matroid.independent_with(t, j) {
                        out.push((j, base + log_lambda[j]));
                    }
                }
            }
            HomogeneousDistribution::ClusterLayer { matroid, log_q, log_lambda, .. } => {
                // One spanning subset of T answers every rank(T + j) query.
                let basis = matroid.maximal_independent_subset(t);
                let base = sum_at(log_lambda, t);
                let full = basis.len() == matroid.rank();
                for j in outside {
                    let rank = basis.len() + usize::from(!full && matroid.independent_with(&basis, j));
                    out.push((j, -(rank as f64) * log_q + base + log_lambda[j]));
                }
            }
            HomogeneousDistribution::DppAlpha { kernel, alpha, .. } => {
                let Some(factor) = kernel.factor(t) else { return };
                let mut scratch = Vec::with_capacity(t.len());
                for j in outside {
                    let s = kernel.schur_value(&factor, t, j, &mut scratch);
                    if s > kernel.tolerance() {
                        out.push((j, alpha * (factor.log_det + s.ln())));
                    }
                }
            }
            HomogeneousDistribution::Explicit(p) => {
                let mut buf = Vec::with_capacity(t.len() + 1);
                if t.len() + 1 == p.d() {
                    for j in outside {
                        buf.clear();
                        merge_into(t, &[j], &mut buf);
                        if let Some(c) = p.coeff_map().get(buf.as_slice()) {
                            out.push((j, c.ln()));
                        }
                    }
                } else {
                    let tau = Subset::from_sorted(t.to_vec());
                    let grad = p.derivative_link(&tau).gradient_at_one();
                    out.extend(outside.filter(|&j| grad[j] > 0.0).map(|j| (j, grad[j].ln())));
                }
            }
        }
    }

    /// Checked form of [`Self::candidates_into`] for `|T| = d − 1`.
    pub fn extension_candidates(&self, t: &Subset) -> Result<Vec<(usize, LogWeight)>> {
        t.check_range(self.n())?;
        if t.len() + 1 != self.d() {
            return Err(Error::input(format!("set {t:?} has size {}, expected {}", t.len(), self.d().saturating_sub(1))));
        }
        let mut out = Vec::new();
        self.candidates_into(t.as_slice(), &mut out);
        if out.is_empty() {
            return Err(Error::State(format!("{t:?} extends to no member of the support")));
        }
        Ok(out.into_iter().map(|(j, w)| (j, LogWeight(w))).collect())
    }

    /// A deterministic member of the support: the greedy basis for
    /// matroid bases, the maximum-weight term for explicit polynomials, and a
    /// weighted greedy build (ties to the lowest index) otherwise.
    pub fn initial_state(&self) -> Result<Subset> {
        let start = match self {
            HomogeneousDistribution::UniformBases { matroid, .. } => matroid.greedy_basis(),
            HomogeneousDistribution::Explicit(p) => {
                let mut best: Option<(&Subset, f64)> = None;
                for (s, c) in p.terms() {
                    if best.is_none_or(|(_, b)| c > b) {
                        best = Some((s, c));
                    }
                }
                best.map(|(s, _)| s.clone()).ok_or_else(|| Error::input("polynomial has empty support"))?
            }
            _ => {
                let mut t = Vec::with_capacity(self.d());
                let mut cands = Vec::new();
                while t.len() < self.d() {
                    self.candidates_into(&t, &mut cands);
                    let mut best: Option<(usize, f64)> = None;
                    for &(j, w) in &cands {
                        if best.is_none_or(|(_, b)| w > b) {
                            best = Some((j, w));
                        }
                    }
                    let Some((j, _)) = best else {
                        return Err(Error::input(format!("no support member of size {} exists", self.d())));
                    };
                    let pos = t.partition_point(|&x| x < j);
                    t.insert(pos, j);
                }
                Subset::from_sorted(t)
            }
        };
        if self.log_weight_slice(start.as_slice()) == f64::NEG_INFINITY {
            return Err(Error::input("no support member found"));
        }
        Ok(start)
    }

    /// An upper bound on `max_S log μ(S)`.
    pub fn log_weight_upper_bound(&self) -> f64 {
        let top = |v: &[f64], k: usize| {
            let mut v = v.to_vec();
            v.sort_by(|a, b| b.total_cmp(a));
            v.iter().take(k).sum::<f64>()
        };
        match self {
            HomogeneousDistribution::UniformBases { log_lambda, matroid } => top(log_lambda, matroid.rank()),
            HomogeneousDistribution::ClusterLayer { matroid, k, log_q, log_lambda } => {
                (*k).min(matroid.rank()) as f64 * -log_q + top(log_lambda, *k)
            }
            HomogeneousDistribution::DppAlpha { kernel, k, alpha } => {
                if *alpha == 0.0 {
                    0.0
                } else {
                    alpha * kernel.log_det_upper_bound(*k)
                }
            }
            HomogeneousDistribution::Explicit(p) => p.terms().map(|(_, c)| c.ln()).fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// Support members with their log-weights in lexicographic order, found
    /// by depth-first search over partial faces. Fails once more than `cap`
    /// members have been found.
    pub fn support(&self, cap: usize) -> Result<Vec<(Subset, f64)>> {
        if let HomogeneousDistribution::Explicit(p) = self {
            if p.len() > cap {
                return Err(Error::Resource(format!("support of {} terms exceeds cap {cap}", p.len())));
            }
            return Ok(p.terms().map(|(s, c)| (s.clone(), c.ln())).collect());
        }
        let mut out = Vec::new();
        let mut t = Vec::with_capacity(self.d());
        self.dfs(&mut t, 0, cap, &mut out)?;
        Ok(out)
    }

    fn is_partial_face(&self, t: &[usize]) -> bool {
        match self {
            HomogeneousDistribution::UniformBases { matroid, .. } => matroid.independent(t),
            HomogeneousDistribution::ClusterLayer { .. } => true,
            HomogeneousDistribution::DppAlpha { kernel, .. } => kernel.log_det(t) > f64::NEG_INFINITY,
            HomogeneousDistribution::Explicit(_) => unreachable!("explicit supports are listed directly"),
        }
    }

    fn dfs(&self, t: &mut Vec<usize>, start: usize, cap: usize, out: &mut Vec<(Subset, f64)>) -> Result<()> {
        let (n, d) = (self.n(), self.d());
        if t.len() == d {
            let w = self.log_weight_slice(t);
            if w > f64::NEG_INFINITY {
                if out.len() == cap {
                    return Err(Error::Resource(format!("support exceeds cap {cap}")));
                }
                out.push((Subset::from_sorted(t.clone()), w));
            }
            return Ok(());
        }
        for j in start..=n - (d - t.len()) {
            t.push(j);
            if self.is_partial_face(t) {
                self.dfs(t, j + 1, cap, out)?;
            }
            t.pop();
        }
        Ok(())
    }

    /// The generating polynomial with coefficients `exp(log μ(S) − shift)`,
    /// where `shift` is the largest log-weight when that lies outside
    /// `[-300, 300]` and zero otherwise. Returns the polynomial and `shift`.
    pub fn materialize_scaled(&self, cap: usize) -> Result<(ExplicitPolynomial, f64)> {
        let support = self.support(cap)?;
        let max = support.iter().map(|(_, w)| *w).fold(f64::NEG_INFINITY, f64::max);
        let shift = if max.abs() > 300.0 { max } else { 0.0 };
        let coeffs = support.into_iter().map(|(s, w)| (s, (w - shift).exp())).filter(|(_, c)| *c > 0.0).collect();
        Ok((ExplicitPolynomial::from_map(self.n(), self.d(), coeffs), shift))
    }

    /// [`Self::materialize_scaled`] without the shift.
    pub fn materialize(&self, cap: usize) -> Result<ExplicitPolynomial> {
        Ok(self.materialize_scaled(cap)?.0)
    }

    /// Restriction to support members containing `e`, with `e` removed and
    /// larger labels shifted down. Returns `log c` and `ν` such that
    /// `μ(S) = c · ν(S ∖ e)` for every `S ∋ e`.
    pub fn condition_on(&self, e: usize) -> Result<(f64, HomogeneousDistribution)> {
        if e >= self.n() {
            return Err(Error::input(format!("element {e} outside ground set of size {}", self.n())));
        }
        if self.d() == 0 {
            return Err(Error::State("cannot condition a degree-zero distribution".into()));
        }
        let e_set = Subset::singleton(e);
        Ok(match self {
            HomogeneousDistribution::UniformBases { matroid, log_lambda } => {
                let m = matroid.contract(&e_set).map_err(|_| Error::State(format!("element {e} is a loop")))?;
                (log_lambda[e], HomogeneousDistribution::UniformBases { matroid: m, log_lambda: without(log_lambda, e) })
            }
            HomogeneousDistribution::ClusterLayer { matroid, k, log_q, log_lambda } => {
                let loop_ = !matroid.independent(&[e]);
                let (factor, m) = if loop_ {
                    (log_lambda[e], matroid.delete(&e_set)?)
                } else {
                    (log_lambda[e] - log_q, matroid.contract(&e_set)?)
                };
                let next = HomogeneousDistribution::ClusterLayer {
                    matroid: m,
                    k: k - 1,
                    log_q: *log_q,
                    log_lambda: without(log_lambda, e),
                };
                (factor, next)
            }
            HomogeneousDistribution::DppAlpha { kernel, k, alpha } => {
                let (log_pivot, next) = kernel.condition(e)?;
                let factor = if *alpha == 0.0 { 0.0 } else { alpha * log_pivot };
                (factor, HomogeneousDistribution::DppAlpha { kernel: next, k: k - 1, alpha: *alpha })
            }
            HomogeneousDistribution::Explicit(p) => {
                let q = p.derivative_link(&e_set).drop_element(e);
                if q.is_zero() {
                    return Err(Error::State(format!("no support member contains {e}")));
                }
                (0.0, HomogeneousDistribution::Explicit(q))
            }
        })
    }

    /// Restriction to support members avoiding `e`, with larger labels
    /// shifted down. Weights are unchanged.
    pub fn exclude(&self, e: usize) -> Result<HomogeneousDistribution> {
        if e >= self.n() {
            return Err(Error::input(format!("element {e} outside ground set of size {}", self.n())));
        }
        if self.d() == self.n() {
            return Err(Error::State(format!("every support member contains {e}")));
        }
        let e_set = Subset::singleton(e);
        Ok(match self {
            HomogeneousDistribution::UniformBases { matroid, log_lambda } => {
                let m = matroid.delete(&e_set)?;
                if m.rank() < matroid.rank() {
                    return Err(Error::State(format!("element {e} is a coloop")));
                }
                HomogeneousDistribution::UniformBases { matroid: m, log_lambda: without(log_lambda, e) }
            }
            HomogeneousDistribution::ClusterLayer { matroid, k, log_q, log_lambda } => HomogeneousDistribution::ClusterLayer {
                matroid: matroid.delete(&e_set)?,
                k: *k,
                log_q: *log_q,
                log_lambda: without(log_lambda, e),
            },
            HomogeneousDistribution::DppAlpha { kernel, k, alpha } => {
                HomogeneousDistribution::DppAlpha { kernel: kernel.remove(e), k: *k, alpha: *alpha }
            }
            HomogeneousDistribution::Explicit(p) => {
                let kept = p.coeff_map().iter().filter(|(s, _)| !s.contains(e)).map(|(s, &c)| (s.clone(), c)).collect();
                let q = ExplicitPolynomial::from_map(p.n(), p.d(), kept).drop_element(e);
                if q.is_zero() {
                    return Err(Error::State(format!("every support member contains {e}")));
                }
                HomogeneousDistribution::Explicit(q)
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subset::k_subsets;

    fn s(v: &[usize]) -> Subset {
        Subset::new(v.to_vec()).unwrap()
    }

    fn u24() -> HomogeneousDistribution {
        HomogeneousDistribution::uniform_bases(Matroid::uniform(4, 2).unwrap(), None).unwrap()
    }

    #[test]
    fn log_weight_examples() {
        assert_eq!(u24().log_weight(&s(&[0, 1])).unwrap(), LogWeight::ONE);
        let k4 = Matroid::complete_graph(4);
        let c = HomogeneousDistribution::cluster_layer(k4, 3, 1.0, None).unwrap();
        for t in k_subsets(6, 3) {
            assert_eq!(c.log_weight(&t).unwrap().0, 0.0);
        }
        let dpp = HomogeneousDistribution::dpp_alpha(DppKernel::identity(5), 3, 0.7).unwrap();
        for t in k_subsets(5, 3) {
            assert_eq!(dpp.log_weight(&t).unwrap().0, 0.0);
        }
        assert!(u24().log_weight(&s(&[0])).is_err());
        assert!(u24().log_weight(&s(&[0, 7])).is_err());
    }

    #[test]
    fn candidate_examples() {
        let c = u24().extension_candidates(&s(&[1])).unwrap();
        assert_eq!(c, vec![(0, LogWeight(0.0)), (2, LogWeight(0.0)), (3, LogWeight(0.0))]);

        let k4 = HomogeneousDistribution::uniform_bases(Matroid::complete_graph(4), None).unwrap();
        // Edges (0,1) and (2,3) form a matching: every other edge completes a tree.
        let c: Vec<usize> = k4.extension_candidates(&s(&[0, 5])).unwrap().into_iter().map(|(j, _)| j).collect();
        assert_eq!(c, vec![1, 2, 3, 4]);
        // Path (0,1),(1,2): edges (0,2) closes a triangle.
        let c: Vec<usize> = k4.extension_candidates(&s(&[0, 3])).unwrap().into_iter().map(|(j, _)| j).collect();
        assert_eq!(c, vec![2, 4, 5]);

        let cl = HomogeneousDistribution::cluster_layer(Matroid::complete_graph(4), 3, 0.5, None).unwrap();
        assert_eq!(cl.extension_candidates(&s(&[0, 1])).unwrap().len(), 4);

        let loopy = HomogeneousDistribution::uniform_bases(Matroid::uniform(3, 1).unwrap(), None).unwrap();
        assert!(matches!(
            loopy.extension_candidates(&s(&[0, 1])),
            Err(Error::Input { .. })
        ));
        // A loop lies in no basis.
        let with_loop = Matroid::linear(3, &[vec![1, 0, 0], vec![0, 0, 1]]).unwrap();
        let mu = HomogeneousDistribution::uniform_bases(with_loop, None).unwrap();
        assert!(matches!(mu.extension_candidates(&s(&[1])), Err(Error::State(_))));
    }

    #[test]
    fn cluster_candidate_weights_match_direct_evaluation() {
        let m = Matroid::fano();
        let cl = HomogeneousDistribution::cluster_layer(m, 4, 0.25, Some(vec![1.0, 2.0, 0.5, 1.5, 1.0, 3.0, 0.7])).unwrap();
        for t in k_subsets(7, 3) {
            for (j, w) in cl.extension_candidates(&t).unwrap() {
                let direct = cl.log_weight(&t.with(j)).unwrap();
                assert!((w.0 - direct.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn materialize_examples() {
        let p = u24().materialize(100).unwrap();
        assert_eq!(p.len(), 6);
        assert!(p.terms().all(|(_, c)| c == 1.0));
        let k4 = HomogeneousDistribution::uniform_bases(Matroid::complete_graph(4), None).unwrap();
        assert_eq!(k4.materialize(100).unwrap().len(), 16);
        assert!(matches!(k4.materialize(10), Err(Error::Resource(_))));
        let cl = HomogeneousDistribution::cluster_layer(Matroid::uniform(2, 1).unwrap(), 1, 0.5, None).unwrap();
        let p = cl.materialize(10).unwrap();
        assert_eq!(p.terms().map(|(_, c)| c).collect::<Vec<_>>(), vec![2.0, 2.0]);
    }

    #[test]
    fn materialize_shifts_only_extreme_weights() {
        let big = HomogeneousDistribution::uniform_bases(Matroid::uniform(3, 2).unwrap(), Some(vec![1e200, 1e200, 1.0])).unwrap();
        let (p, shift) = big.materialize_scaled(10).unwrap();
        assert!(shift > 900.0);
        assert_eq!(p.coefficient(&s(&[0, 1])), 1.0);
    }

    #[test]
    fn initial_states_lie_in_support() {
        let cl = HomogeneousDistribution::cluster_layer(Matroid::complete_graph(4), 4, 0.5, None).unwrap();
        let start = cl.initial_state().unwrap();
        // The first three edges chosen maximise rank; the fourth is the lowest
        // remaining index.
        assert_eq!(start.len(), 4);
        assert!(cl.log_weight(&start).unwrap().is_positive());
        let b = nalgebra::DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 2.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let dpp = HomogeneousDistribution::dpp_alpha(DppKernel::new(&b * b.transpose()).unwrap(), 2, 0.5).unwrap();
        let start = dpp.initial_state().unwrap();
        assert!(dpp.log_weight(&start).unwrap().is_positive());
        let dpp3 = HomogeneousDistribution::dpp_alpha(DppKernel::new(&b * b.transpose()).unwrap(), 3, 0.5).unwrap();
        assert!(dpp3.initial_state().is_err());
    }

    #[test]
    fn exclusion_keeps_weights() {
        let k4 = HomogeneousDistribution::uniform_bases(Matroid::complete_graph(4), None).unwrap();
        let rest = k4.exclude(2).unwrap();
        assert_eq!(rest.support(100).unwrap().len(), 8);
        let tree = HomogeneousDistribution::uniform_bases(Matroid::graphic(3, vec![(0, 1), (1, 2)]).unwrap(), None).unwrap();
        assert!(matches!(tree.exclude(0), Err(Error::State(_))));
        let dpp = HomogeneousDistribution::dpp_alpha(
            DppKernel::new(nalgebra::DMatrix::from_fn(4, 4, |i, j| 1.0 / (1 + i + j) as f64)).unwrap(),
            2,
            0.5,
        )
        .unwrap();
        let rest = dpp.exclude(1).unwrap();
        let a = dpp.log_weight(&s(&[0, 3])).unwrap().0;
        let b = rest.log_weight(&s(&[0, 2])).unwrap().0;
        assert_eq!(a, b);
    }

    #[test]
    fn conditioning_factorises_weights() {
        let cases = vec![
            HomogeneousDistribution::uniform_bases(Matroid::fano(), Some(vec![1.0, 2.0, 3.0, 0.5, 0.25, 1.5, 2.5])).unwrap(),
            HomogeneousDistribution::cluster_layer(
                Matroid::linear(3, &[vec![1, 0, 0, 1, 2], vec![0, 0, 1, 1, 0]]).unwrap(),
                3,
                0.3,
                None,
            )
            .unwrap(),
            HomogeneousDistribution::dpp_alpha(
                DppKernel::new(nalgebra::DMatrix::from_fn(5, 5, |i, j| 1.0 / (1 + i + j) as f64)).unwrap(),
                3,
                0.6,
            )
            .unwrap(),
        ];
        for mu in cases {
            let n = mu.n();
            for e in 0..n {
                let Ok((factor, nu)) = mu.condition_on(e) else {
                    continue;
                };
                for t in k_subsets(n, mu.d()).filter(|t| t.contains(e)) {
                    let reduced = Subset::from_sorted(t.iter().filter(|&x| x != e).map(|x| if x > e { x - 1 } else { x }).collect());
                    let lhs = mu.log_weight(&t).unwrap().0;
                    let rhs = factor + nu.log_weight(&reduced).unwrap().0;
                    if lhs == f64::NEG_INFINITY {
                        assert_eq!(rhs, f64::NEG_INFINITY, "{} e={e} {t:?}", mu.family());
                    } else {
                        assert!((lhs - rhs).abs() < 1e-9, "{} e={e} {t:?}: {lhs} vs {rhs}", mu.family());
                    }
                }
            }
        }
    }
}
