//! Brute-force ground truth: enumeration, exhaustive partition functions,
//! the bases-exchange graph and its expansion, and conductance checks.

use nalgebra::DMatrix;
use serde_json::json;

use crate::complex_spectra::{spectrum, CheckReport, WalkMatrix};
use crate::distributions::{DppKernel, HomogeneousDistribution};
use crate::error::{Error, Result};
use crate::logspace::{KahanSum, LogAccumulator};
use crate::matroids::Matroid;
use crate::sampler::exact_chain;
use crate::subset::{binomial, k_subsets, Subset};

pub const ENUMERATION_BUDGET: f64 = 1e6;
pub const SUBSET_SUM_MAX_N: usize = 24;
pub const EXPANSION_MAX_VERTICES: usize = 22;
pub const CONDUCTANCE_MAX_STATES: usize = 20;

/// All bases in lexicographic order, by depth-first search over independent sets.
pub fn enumerate_bases(m: &Matroid) -> Result<Vec<Subset>> {
    if binomial(m.n(), m.rank()) > ENUMERATION_BUDGET {
        return Err(Error::Resource(format!("C({}, {}) exceeds the enumeration budget", m.n(), m.rank())));
    }
    fn go(m: &Matroid, t: &mut Vec<usize>, start: usize, out: &mut Vec<Subset>) {
        if t.len() == m.rank() {
            out.push(Subset::from_sorted(t.clone()));
            return;
        }
        for j in start..=m.n() - (m.rank() - t.len()) {
            t.push(j);
            if m.independent(t) {
                go(m, t, j + 1, out);
            }
            t.pop();
        }
    }
    let mut out = Vec::new();
    go(m, &mut Vec::with_capacity(m.rank()), 0, &mut out);
    Ok(out)
}

/// Number of maximal spanning forests of a multigraph: the product over
/// connected components of a reduced Laplacian determinant.
pub fn kirchhoff_count(vertices: usize, edges: &[(usize, usize)]) -> f64 {
    let mut parent: Vec<usize> = (0..vertices).collect();
    fn find(c: &mut [usize], mut a: usize) -> usize {
        while c[a] != a {
            c[a] = c[c[a]];
            a = c[a];
        }
        a
    }
    for &(a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        parent[ra] = rb;
    }
    let label: Vec<usize> = (0..vertices).map(|v| find(&mut parent, v)).collect();
    let mut total = 1.0;
    for root in (0..vertices).filter(|&v| label[v] == v) {
        let members: Vec<usize> = (0..vertices).filter(|&v| label[v] == root).collect();
        let k = members.len();
        if k == 1 {
            continue;
        }
        let pos = |v: usize| members.binary_search(&v).expect("vertex in component");
        let mut lap = DMatrix::<f64>::zeros(k, k);
        for &(a, b) in edges.iter().filter(|&&(a, b)| a != b && label[a] == root) {
            let (i, j) = (pos(a), pos(b));
            lap[(i, i)] += 1.0;
            lap[(j, j)] += 1.0;
            lap[(i, j)] -= 1.0;
            lap[(j, i)] -= 1.0;
        }
        total *= lap.view((1, 1), (k - 1, k - 1)).into_owned().determinant().round();
    }
    total
}

/// `log Σ_S μ(S)` over all `d`-subsets by exhaustive summation.
pub fn exact_log_partition(mu: &HomogeneousDistribution) -> Result<f64> {
    if binomial(mu.n(), mu.d()) > ENUMERATION_BUDGET {
        return Err(Error::Resource(format!("C({}, {}) exceeds the enumeration budget", mu.n(), mu.d())));
    }
    let mut acc = LogAccumulator::default();
    for s in k_subsets(mu.n(), mu.d()) {
        acc.add(mu.log_weight_slice(s.as_slice()));
    }
    Ok(acc.log_total())
}

/// `Pr_{S∼μ}[e ∈ S]` for every element, from the enumerated support.
pub fn exact_marginals(mu: &HomogeneousDistribution, cap: usize) -> Result<Vec<f64>> {
    let support = mu.support(cap)?;
    let max = support.iter().map(|(_, w)| *w).fold(f64::NEG_INFINITY, f64::max);
    let mut per = vec![KahanSum::default(); mu.n()];
    let mut total = KahanSum::default();
    for (s, w) in &support {
        let v = (w - max).exp();
        total.add(v);
        for i in s.iter() {
            per[i].add(v);
        }
    }
    Ok(per.iter().map(|p| p.total() / total.total()).collect())
}

fn check_subset_budget(n: usize) -> Result<()> {
    if n > SUBSET_SUM_MAX_N {
        return Err(Error::Resource(format!("2^{n} subsets exceed the exhaustive budget 2^{SUBSET_SUM_MAX_N}")));
    }
    Ok(())
}

fn subset_ranks(m: &Matroid) -> Result<Vec<u8>> {
    check_subset_budget(m.n())?;
    Ok((0u64..1 << m.n()).map(|mask| m.rank_slice(Subset::from_mask(mask).as_slice()) as u8).collect())
}

/// `log Z_M(p, q) = log Σ_S q^{r+1−rank S} p^{|S|}`, exhaustively.
pub fn exact_cluster_log_partition(m: &Matroid, p: f64, q: f64) -> Result<f64> {
    let ranks = subset_ranks(m)?;
    let (lp, lq) = (p.ln(), q.ln());
    let r = m.rank() as f64;
    let mut acc = LogAccumulator::default();
    for (mask, &rank) in ranks.iter().enumerate() {
        let size = mask.count_ones();
        let size_term = if size == 0 { 0.0 } else { size as f64 * lp };
        let q_term = if (r + 1.0 - rank as f64) == 0.0 { 0.0 } else { (r + 1.0 - rank as f64) * lq };
        acc.add(q_term + size_term);
    }
    Ok(acc.log_total())
}

/// `f_{M,k,q}(1) = Σ_{|S|=k} q^{−rank S}`.
pub fn exact_cluster_layer(m: &Matroid, k: usize, q: f64) -> Result<f64> {
    let mu = HomogeneousDistribution::cluster_layer(m.clone(), k, q, None)?;
    Ok(exact_log_partition(&mu)?.exp())
}

/// `C_M(p) = Σ_{S spanning} (1−p)^{|S|} p^{n−|S|}`.
pub fn exact_reliability(m: &Matroid, p: f64) -> Result<f64> {
    let ranks = subset_ranks(m)?;
    let n = m.n() as i32;
    let mut sum = KahanSum::default();
    for (mask, &rank) in ranks.iter().enumerate() {
        if rank as usize == m.rank() {
            let s = mask.count_ones() as i32;
            sum.add((1.0 - p).powi(s) * p.powi(n - s));
        }
    }
    Ok(sum.total())
}

/// `T_M(x, y) = Σ_S (x−1)^{r−rank S} (y−1)^{|S|−rank S}`.
pub fn exact_tutte(m: &Matroid, x: f64, y: f64) -> Result<f64> {
    let ranks = subset_ranks(m)?;
    let r = m.rank() as i32;
    let mut sum = KahanSum::default();
    for (mask, &rank) in ranks.iter().enumerate() {
        let s = mask.count_ones() as i32;
        sum.add((x - 1.0).powi(r - rank as i32) * (y - 1.0).powi(s - rank as i32));
    }
    Ok(sum.total())
}

/// `Σ_{|S|=k} det(L_S)^α` with determinants from a dense LU factorisation;
/// minors that are not positive contribute nothing.
pub fn exact_dpp_partition(kernel: &DppKernel, k: usize, alpha: f64) -> Result<f64> {
    let n = kernel.n();
    if binomial(n, k) > ENUMERATION_BUDGET {
        return Err(Error::Resource(format!("C({n}, {k}) exceeds the enumeration budget")));
    }
    let l = kernel.matrix();
    let mut sum = KahanSum::default();
    for s in k_subsets(n, k) {
        let idx = s.as_slice();
        let det = DMatrix::from_fn(k, k, |a, b| l[(idx[a], idx[b])]).determinant();
        if det > 0.0 {
            sum.add(det.powf(alpha));
        }
    }
    Ok(sum.total())
}

/// `e_k(d_1, ..., d_n)` by the standard recurrence.
pub fn elementary_symmetric(values: &[f64], k: usize) -> f64 {
    let mut e = vec![0.0; k + 1];
    e[0] = 1.0;
    for &v in values {
        for j in (1..=k).rev() {
            e[j] += v * e[j - 1];
        }
    }
    e[k]
}

#[derive(Debug, Clone)]
pub struct ExchangeGraph {
    pub vertices: Vec<Subset>,
    pub adjacency: Vec<Vec<usize>>,
}

impl ExchangeGraph {
    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn is_connected(&self) -> bool {
        let m = self.vertices.len();
        if m == 0 {
            return true;
        }
        let mut seen = vec![false; m];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &w in &self.adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.iter().all(|&s| s)
    }
}

/// Bases as vertices, adjacent when they differ by a single exchange.
pub fn bases_exchange_graph(m: &Matroid) -> Result<ExchangeGraph> {
    let vertices = enumerate_bases(m)?;
    let adjacency = vertices
        .iter()
        .map(|a| {
            vertices.iter().enumerate().filter(|(_, b)| a.difference(b).len() == 1).map(|(j, _)| j).collect()
        })
        .collect();
    Ok(ExchangeGraph { vertices, adjacency })
}

/// `min |E(S, S̄)| / |S|` over nonempty `S` with `|S| ≤ |V|/2`, enumerating
/// all subsets in Gray-code order with incremental cut updates. Infinite
/// when no such `S` exists.
pub fn exact_expansion(g: &ExchangeGraph) -> Result<f64> {
    let m = g.vertices.len();
    if m > EXPANSION_MAX_VERTICES {
        return Err(Error::Resource(format!("{m} vertices exceed the expansion budget {EXPANSION_MAX_VERTICES}")));
    }
    let adj: Vec<u32> = g.adjacency.iter().map(|n| n.iter().fold(0u32, |acc, &w| acc | 1 << w)).collect();
    let mut best = f64::INFINITY;
    let (mut set, mut cut, mut size) = (0u32, 0i64, 0usize);
    for i in 1u64..1 << m {
        let v = i.trailing_zeros() as usize;
        let inside = (adj[v] & set).count_ones() as i64;
        let deg = adj[v].count_ones() as i64;
        if set >> v & 1 == 0 {
            cut += deg - 2 * inside;
            size += 1;
        } else {
            cut -= deg - 2 * inside;
            size -= 1;
        }
        set ^= 1 << v;
        if 2 * size <= m {
            best = best.min(cut as f64 / size as f64);
        }
    }
    Ok(best)
}

fn uniform_chain(m: &Matroid) -> Result<WalkMatrix> {
    let mu = HomogeneousDistribution::uniform_bases(m.clone(), None)?;
    let chain = exact_chain(&mu, crate::dense_cap())?;
    Ok(WalkMatrix { faces: chain.faces, matrix: chain.transition, weights: chain.stationary })
}

/// Every off-diagonal transition of the uniform-bases chain is at most `1/(2r)`.
pub fn transition_bound_check(m: &Matroid) -> Result<CheckReport> {
    let tol = 1e-12;
    if m.rank() == 0 {
        return Ok(CheckReport::new("fact_2r", None, true, tol));
    }
    let walk = uniform_chain(m)?;
    let bound = 1.0 / (2.0 * m.rank() as f64);
    let mut worst: Option<(Subset, f64)> = None;
    for i in 0..walk.len() {
        for j in (0..walk.len()).filter(|&j| j != i) {
            let v = walk.matrix[(i, j)];
            if worst.as_ref().is_none_or(|(_, b)| v > *b) {
                worst = Some((walk.faces[i].clone(), v));
            }
        }
    }
    let pass = worst.as_ref().is_none_or(|(_, v)| *v <= bound + tol);
    Ok(CheckReport::new("fact_2r", worst, pass, tol).with_detail(json!({ "bound": bound })))
}

/// Exact conductance of the uniform-bases chain against both Cheeger bounds
/// and against `1/(2r)`.
pub fn conductance_vs_cheeger(m: &Matroid) -> Result<CheckReport> {
    let tol = 1e-12;
    let walk = uniform_chain(m)?;
    let states = walk.len();
    if states > CONDUCTANCE_MAX_STATES {
        return Err(Error::Resource(format!("{states} bases exceed the conductance budget {CONDUCTANCE_MAX_STATES}")));
    }
    if states < 2 {
        return Ok(CheckReport::new("cheeger", None, true, tol));
    }
    let lambda2 = spectrum(&walk)?.lambda2();
    let pi = &walk.weights;
    let flow = DMatrix::from_fn(states, states, |a, b| if a == b { 0.0 } else { pi[a] * walk.matrix[(a, b)] });
    let out_flow: Vec<f64> = (0..states).map(|a| flow.row(a).sum()).collect();
    let mut best = f64::INFINITY;
    let (mut set, mut cut, mut vol) = (0u32, 0.0f64, 0.0f64);
    let mut members = vec![false; states];
    for i in 1u64..1 << states {
        let v = i.trailing_zeros() as usize;
        let inside: f64 = (0..states).filter(|&b| members[b]).map(|b| flow[(v, b)]).sum();
        if members[v] {
            cut -= out_flow[v] - 2.0 * inside;
            vol -= pi[v];
        } else {
            cut += out_flow[v] - 2.0 * inside;
            vol += pi[v];
        }
        members[v] = !members[v];
        set ^= 1 << v;
        if vol <= 0.5 + 1e-15 && set != 0 {
            best = best.min(cut / vol);
        }
    }
    let lower = (1.0 - lambda2) / 2.0;
    let upper = (2.0 * (1.0 - lambda2)).sqrt();
    let floor = 1.0 / (2.0 * m.rank() as f64);
    let pass = lower <= best + tol && best <= upper + tol && best >= floor - tol;
    let mut report = CheckReport::new("cheeger", None, pass, tol);
    report.worst_value = best;
    Ok(report.with_detail(json!({ "lambda2": lambda2, "cheeger_lower": lower, "cheeger_upper": upper, "rank_floor": floor })))
}

/// Exhaustive expansion of the bases-exchange graph against `1`.
pub fn expansion_check(m: &Matroid) -> Result<CheckReport> {
    let g = bases_exchange_graph(m)?;
    let h = exact_expansion(&g)?;
    let tol = 1e-12;
    let mut report = CheckReport::new("expansion", None, h >= 1.0 - tol, tol);
    report.worst_value = h;
    Ok(report.with_detail(json!({ "bases": g.vertices.len(), "edges": g.edge_count(), "connected": g.is_connected() })))
}

/// Basis count by enumeration, cross-checked against the matrix-tree
/// theorem for graphic matroids.
pub fn exact_count_check(m: &Matroid) -> Result<CheckReport> {
    let count = enumerate_bases(m)?.len();
    let kirchhoff = m.as_graph().map(|(v, e)| kirchhoff_count(v, e));
    let pass = kirchhoff.is_none_or(|k| k == count as f64);
    let mut report = CheckReport::new("exact_count", None, pass, 0.0);
    report.worst_value = count as f64;
    Ok(report.with_detail(json!({ "bases": count, "kirchhoff": kirchhoff })))
}
