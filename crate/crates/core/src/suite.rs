//! The desk-scale instance suite and one runner per acceptance criterion.
//! Shared by the `suite` command and the acceptance test target.

use std::time::Instant;

use nalgebra::DMatrix;
use rand::Rng;
use serde::Serialize;

use crate::complex_spectra::{
    check_strong_log_concavity, eigenvalue_count_check, local_walk, loewner_domination_check, normalized_hessian,
    shared_spectrum_check, spectral_gap_check, CheckReport, WeightedComplex,
};
use crate::counting::{cluster_partition, count_bases, dpp_partition, reliability, tutte_eval, EstimateConfig};
use crate::distributions::{DppKernel, ExplicitPolynomial, HomogeneousDistribution};
use crate::error::Result;
use crate::exact_oracle::{
    conductance_vs_cheeger, enumerate_bases, exact_cluster_log_partition, exact_dpp_partition, exact_reliability,
    exact_tutte, expansion_check, transition_bound_check,
};
use crate::matroids::Matroid;
use crate::rng::substream;
use crate::sampler::{exact_tv_curve, mixing_bound, sample_tagged, SamplerConfig};
use crate::subset::{binomial, Subset};

/// The suite matroids, all with at most 12 elements.
pub fn matroids() -> Vec<(String, Matroid)> {
    let k4 = Matroid::complete_graph(4);
    let k5 = Matroid::complete_graph(5);
    let fano = Matroid::fano();
    let blocks = vec![vec![0, 1], vec![2, 3], vec![4, 5]];
    vec![
        ("U(2,4)".into(), Matroid::uniform(4, 2).unwrap()),
        ("U(3,6)".into(), Matroid::uniform(6, 3).unwrap()),
        ("K4".into(), k4.clone()),
        ("K5".into(), k5.clone()),
        ("truncate(K4,2)".into(), k4.truncate(2).unwrap()),
        ("Fano".into(), fano.clone()),
        ("partition(2+2+2,1)".into(), Matroid::partition(blocks, vec![1, 1, 1]).unwrap()),
        ("dual(K4)".into(), k4.dual()),
        ("dual(Fano)".into(), fano.dual()),
        ("K5/{0}".into(), k5.contract(&Subset::singleton(0)).unwrap()),
        ("K5\\{0}".into(), k5.delete(&Subset::singleton(0)).unwrap()),
        ("truncate(dual(K5),3)".into(), k5.dual().truncate(3).unwrap()),
    ]
}

pub const CLUSTER_Q: [f64; 3] = [0.25, 0.5, 1.0];
pub const DPP_ALPHA: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

/// `B Bᵀ` for a `n × rank` matrix with entries uniform in `[-1, 1]`.
pub fn random_psd_kernel(n: usize, rank: usize, seed: u64) -> DppKernel {
    let mut rng = substream(seed, &[n as u64, rank as u64]);
    let b = DMatrix::from_fn(n, rank, |_, _| rng.gen_range(-1.0..1.0));
    let l = &b * b.transpose();
    DppKernel::new((&l + l.transpose()) * 0.5).expect("B Bᵀ is positive semidefinite")
}

/// `(name, kernel, k)` for the DPP instances; one kernel is rank-deficient
/// so that some `k`-minors vanish.
pub fn dpp_kernels() -> Vec<(String, DppKernel, usize)> {
    vec![
        ("dpp(n=5,k=2)".into(), random_psd_kernel(5, 5, 1), 2),
        ("dpp(n=6,k=3)".into(), random_psd_kernel(6, 6, 2), 3),
        ("dpp(n=8,k=4,rank 5)".into(), random_psd_kernel(8, 5, 3), 4),
    ]
}

fn positive_weights(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = substream(seed, &[n as u64]);
    (0..n).map(|_| rng.gen_range(0.5..2.0)).collect()
}

/// Every distribution family on every suite instance: uniform and weighted
/// bases, cluster layers for each `q` at `k ∈ {2, r, r + 1}`, and `DPP^α`.
pub fn distributions() -> Vec<(String, HomogeneousDistribution)> {
    let mut out = Vec::new();
    for (i, (name, m)) in matroids().into_iter().enumerate() {
        out.push((format!("bases {name}"), HomogeneousDistribution::uniform_bases(m.clone(), None).unwrap()));
        let lambda = positive_weights(m.n(), 100 + i as u64);
        out.push((format!("weighted bases {name}"), HomogeneousDistribution::uniform_bases(m.clone(), Some(lambda)).unwrap()));
        let mut ks = vec![2, m.rank(), m.rank() + 1];
        ks.retain(|&k| k >= 1 && k <= m.n());
        ks.dedup();
        for q in CLUSTER_Q {
            for &k in &ks {
                let mu = HomogeneousDistribution::cluster_layer(m.clone(), k, q, None).unwrap();
                out.push((format!("cluster {name} k={k} q={q}"), mu));
            }
        }
    }
    for (name, kernel, k) in dpp_kernels() {
        for alpha in DPP_ALPHA {
            out.push((format!("{name} alpha={alpha}"), HomogeneousDistribution::dpp_alpha(kernel.clone(), k, alpha).unwrap()));
        }
    }
    out
}

/// Materialized complexes of [`distributions`] whose support fits the cap.
pub fn complexes() -> Result<Vec<(String, ExplicitPolynomial, WeightedComplex)>> {
    let cap = crate::dense_cap();
    let mut out = Vec::new();
    for (name, mu) in distributions() {
        let (p, _) = mu.materialize_scaled(cap)?;
        let x = WeightedComplex::from_polynomial(&p)?;
        out.push((name, p, x));
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionOutcome {
    pub id: u32,
    pub title: String,
    pub pass: bool,
    pub checks: usize,
    pub failures: Vec<String>,
    pub summary: String,
    pub elapsed_s: f64,
    pub budget_s: Option<f64>,
}

impl CriterionOutcome {
    /// One line: id, verdict, title, summary and time against budget.
    pub fn line(&self) -> String {
        let budget = self.budget_s.map(|b| format!(" (budget {b:.0} s)")).unwrap_or_default();
        format!(
            "criterion {:>2} {} {}: {} [{} checks, {:.1} s{}]",
            self.id,
            if self.pass { "PASS" } else { "FAIL" },
            self.title,
            self.summary,
            self.checks,
            self.elapsed_s,
            budget
        )
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SuiteOptions {
    /// Seeded runs per estimator for the statistical criterion.
    pub runs: usize,
    pub seed: u64,
    pub workers: usize,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions { runs: 200, seed: 1, workers: 1 }
    }
}

pub const CRITERIA: [u32; 10] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10];

/// Collects check results; errors count as failures.
#[derive(Default)]
struct Tally {
    checks: usize,
    failures: Vec<String>,
}

impl Tally {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn report(&mut self, name: &str, r: Result<CheckReport>) {
        match r {
            Ok(r) => self.check(r.pass, || format!("{name}: {} worst {} at {:?}", r.property, r.worst_value, r.worst_face)),
            Err(e) => self.check(false, || format!("{name}: {e}")),
        }
    }

    fn error(&mut self, name: &str, e: crate::error::Error) {
        self.check(false, || format!("{name}: {e}"));
    }
}

pub fn run_criterion(id: u32, opts: &SuiteOptions) -> CriterionOutcome {
    let start = Instant::now();
    let (title, budget, mut tally, summary) = match id {
        1 => ("matroid axioms", Some(10.0), axioms(), String::new()),
        2 => ("spectral gap of the down-up chain", Some(60.0), spectral_gap(), String::new()),
        3 => ("eigenvalue counts, shared spectra, Loewner order", None, level_spectra(), String::new()),
        4 => ("normalized Hessian equals local walk", None, hessian_identity(), String::new()),
        5 => ("strong log-concavity certification", None, log_concavity(), String::new()),
        6 => ("exact mixing within the step bound", Some(120.0), mixing(), String::new()),
        7 => ("bases-exchange expansion and conductance", Some(60.0), expansion(), String::new()),
        8 => {
            let (t, s) = statistical(opts);
            ("estimator accuracy over seeded runs", Some(1800.0), t, s)
        }
        9 => ("closed-form identities", None, closed_forms(opts), String::new()),
        10 => ("determinism across reruns and workers", None, determinism(opts), String::new()),
        _ => {
            let mut t = Tally::default();
            t.check(false, || format!("no criterion {id}"));
            ("unknown", None, t, String::new())
        }
    };
    let elapsed_s = start.elapsed().as_secs_f64();
    if let Some(b) = budget {
        tally.check(elapsed_s < b, || format!("runtime {elapsed_s:.1} s exceeds {b} s"));
    }
    let pass = tally.failures.is_empty();
    let summary = if !summary.is_empty() {
        summary
    } else if pass {
        "all checks hold".into()
    } else {
        format!("{} failing, first: {}", tally.failures.len(), tally.failures[0])
    };
    CriterionOutcome { id, title: title.into(), pass, checks: tally.checks, failures: tally.failures, summary, elapsed_s, budget_s: budget }
}

pub fn run_all(opts: &SuiteOptions) -> Vec<CriterionOutcome> {
    CRITERIA.iter().map(|&id| run_criterion(id, opts)).collect()
}

/// Independence, ranks and dual ranks of every subset, by bitmask.
fn subset_tables(m: &Matroid) -> (Vec<bool>, Vec<usize>, Vec<usize>) {
    let dual = m.dual();
    let full = 1u64 << m.n();
    let mut indep = Vec::with_capacity(full as usize);
    let mut rank = Vec::with_capacity(full as usize);
    let mut dual_rank = Vec::with_capacity(full as usize);
    for mask in 0..full {
        let s = Subset::from_mask(mask);
        indep.push(m.independent(s.as_slice()));
        rank.push(m.rank_slice(s.as_slice()));
        dual_rank.push(dual.rank_slice(s.as_slice()));
    }
    (indep, rank, dual_rank)
}

fn axioms() -> Tally {
    let mut t = Tally::default();
    for (name, m) in matroids() {
        let n = m.n();
        let (indep, rank, dual_rank) = subset_tables(&m);
        let full = (1usize << n) - 1;
        let mut hereditary = true;
        for mask in 0..=full {
            if indep[mask] {
                hereditary &= (0..n).filter(|i| mask >> i & 1 == 1).all(|i| indep[mask & !(1 << i)]);
            }
        }
        t.check(indep[0] && hereditary, || format!("{name}: independent sets not closed under subsets"));
        let sets: Vec<usize> = (0..=full).filter(|&s| indep[s]).collect();
        let mut exchange = true;
        for &a in &sets {
            for &b in &sets {
                if a.count_ones() < b.count_ones() {
                    exchange &= (0..n).any(|e| b >> e & 1 == 1 && a >> e & 1 == 0 && indep[a | 1 << e]);
                }
            }
        }
        t.check(exchange, || format!("{name}: exchange axiom fails"));
        let mut submodular = true;
        for a in 0..=full {
            for b in a..=full {
                submodular &= rank[a] + rank[b] >= rank[a | b] + rank[a & b];
            }
        }
        t.check(submodular, || format!("{name}: rank is not submodular"));
        let r = rank[full];
        let dual_ok = (0..=full).all(|s| dual_rank[s] + r == s.count_ones() as usize + rank[full & !s]);
        t.check(dual_ok, || format!("{name}: dual rank differs from |S| + r(E∖S) − r(E)"));
        let greedy_ok = (0..=full).all(|s| rank[s] == (if indep[s] { s.count_ones() as usize } else { rank[s] }));
        t.check(greedy_ok && r == m.rank(), || format!("{name}: rank inconsistent with independence"));
    }
    t
}

fn spectral_gap() -> Tally {
    let mut t = Tally::default();
    match complexes() {
        Ok(all) => {
            for (name, _, x) in all {
                t.report(&name, spectral_gap_check(&x));
            }
        }
        Err(e) => t.error("materialize", e),
    }
    t
}

fn level_spectra() -> Tally {
    let mut t = Tally::default();
    match complexes() {
        Ok(all) => {
            for (name, _, x) in all {
                for k in 1..x.d() {
                    t.report(&format!("{name} k={k}"), eigenvalue_count_check(&x, k));
                    t.report(&format!("{name} k={k}"), loewner_domination_check(&x, k));
                }
                for k in 1..x.d() {
                    t.report(&format!("{name} k={k}"), shared_spectrum_check(&x, k));
                }
            }
        }
        Err(e) => t.error("materialize", e),
    }
    t
}

fn hessian_identity() -> Tally {
    let mut t = Tally::default();
    let all = match complexes() {
        Ok(all) => all,
        Err(e) => {
            t.error("materialize", e);
            return t;
        }
    };
    for (name, p, x) in all {
        let err = x.factorial_identity_error(&p);
        t.check(err <= 1e-12, || format!("{name}: factorial weight identity off by {err:e}"));
        if x.d() < 2 {
            continue;
        }
        let mut worst: f64 = 0.0;
        let mut failed = None;
        for tau in x.faces_up_to(x.d() - 2) {
            match (local_walk(&x, tau), normalized_hessian(&p, tau)) {
                (Ok(a), Ok(b)) => {
                    if a.faces != b.faces {
                        failed = Some(format!("{name}: different vertex sets in the link of {tau:?}"));
                        break;
                    }
                    worst = worst.max((&a.matrix - &b.matrix).amax());
                }
                (Err(e), _) | (_, Err(e)) => {
                    failed = Some(format!("{name} at {tau:?}: {e}"));
                    break;
                }
            }
        }
        t.check(failed.is_none() && worst <= 1e-12, || failed.unwrap_or_else(|| format!("{name}: entries differ by {worst:e}")));
    }
    t
}

fn log_concavity() -> Tally {
    let mut t = Tally::default();
    let all = match complexes() {
        Ok(all) => all,
        Err(e) => {
            t.error("materialize", e);
            return t;
        }
    };
    for (name, p, _) in all {
        t.report(&name, check_strong_log_concavity(&p));
    }
    let split = ExplicitPolynomial::new(4, 2, vec![(Subset::from_sorted(vec![0, 1]), 1.0), (Subset::from_sorted(vec![2, 3]), 1.0)]).unwrap();
    match check_strong_log_concavity(&split) {
        Ok(r) => t.check(!r.pass, || "x0x1 + x2x3 was certified".into()),
        Err(e) => t.error("x0x1 + x2x3", e),
    }
    t
}

fn mixing() -> Tally {
    let mut t = Tally::default();
    let cap = crate::dense_cap();
    for (name, mu) in distributions() {
        let (p, _) = match mu.materialize_scaled(cap) {
            Ok(v) => v,
            Err(e) => {
                t.error(&name, e);
                continue;
            }
        };
        let log_z = p.eval_at_one().ln();
        let lightest = p.terms().min_by(|a, b| a.1.total_cmp(&b.1)).map(|(s, _)| s.clone());
        let starts: Vec<Subset> = mu.initial_state().into_iter().chain(lightest).collect();
        for start in starts {
            let log_mu = p.coefficient(&start).ln() - log_z;
            for eps in [0.1, 0.01] {
                let steps = mixing_bound(mu.d(), log_mu, eps);
                match exact_tv_curve(&mu, &start, steps, cap) {
                    Ok(curve) => {
                        let tv = curve.last().map(|c| c.1).unwrap_or(0.0);
                        t.check(tv <= eps, || format!("{name} from {start:?}: distance {tv} after {steps} steps exceeds {eps}"));
                    }
                    Err(e) => t.error(&name, e),
                }
            }
        }
    }
    t
}

fn expansion() -> Tally {
    let mut t = Tally::default();
    for (name, m) in matroids() {
        t.report(&name, transition_bound_check(&m));
        let bases = match enumerate_bases(&m) {
            Ok(b) => b.len(),
            Err(e) => {
                t.error(&name, e);
                continue;
            }
        };
        if bases <= 20 {
            t.report(&name, expansion_check(&m));
            t.report(&name, conductance_vs_cheeger(&m));
        }
    }
    t
}

fn statistical(opts: &SuiteOptions) -> (Tally, String) {
    let mut t = Tally::default();
    let k4 = Matroid::complete_graph(4);
    let cases: Vec<(String, f64, Box<dyn Fn(&EstimateConfig) -> Result<f64>>)> = vec![
        ("count_bases U(2,4)".into(), 6.0, Box::new(|c| Ok(count_bases(&Matroid::uniform(4, 2)?, c)?.estimate))),
        ("count_bases K4".into(), 16.0, Box::new(|c| Ok(count_bases(&Matroid::complete_graph(4), c)?.estimate))),
        ("count_bases Fano".into(), 28.0, Box::new(|c| Ok(count_bases(&Matroid::fano(), c)?.estimate))),
        (
            "cluster K4 p=1 q=0.5".into(),
            exact_cluster_log_partition(&k4, 1.0, 0.5).unwrap().exp(),
            Box::new(|c| Ok(cluster_partition(&Matroid::complete_graph(4), 1.0, 0.5, c)?.estimate)),
        ),
        (
            "reliability K4 p=0.5".into(),
            exact_reliability(&k4, 0.5).unwrap(),
            Box::new(|c| Ok(reliability(&Matroid::complete_graph(4), 0.5, c)?.estimate)),
        ),
    ];
    let need = (0.9 * opts.runs as f64).ceil() as usize;
    let mut parts = Vec::new();
    for (case, (name, truth, run)) in cases.iter().enumerate() {
        let mut hits = 0;
        for i in 0..opts.runs {
            let seed = opts.seed.wrapping_add(1_000_003 * case as u64).wrapping_add(i as u64);
            let cfg = EstimateConfig { workers: opts.workers, ..EstimateConfig::new(0.1, 0.05, seed) };
            match run(&cfg) {
                Ok(est) if est >= 0.9 * truth && est <= 1.1 * truth => hits += 1,
                Ok(_) => {}
                Err(e) => t.error(name, e),
            }
        }
        t.check(hits >= need, || format!("{name}: {hits}/{} within 10% of {truth}", opts.runs));
        parts.push(format!("{name} {hits}/{}", opts.runs));
    }
    (t, parts.join(", "))
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs()
}

fn closed_forms(opts: &SuiteOptions) -> Tally {
    let mut t = Tally::default();
    let cfg = EstimateConfig { workers: opts.workers, ..EstimateConfig::new(0.1, 0.05, opts.seed) };
    for (name, m) in matroids() {
        for p in [0.0f64, 0.5, 1.0, 2.5] {
            let expect = (1.0 + p).powi(m.n() as i32);
            match exact_cluster_log_partition(&m, p, 1.0) {
                Ok(z) => t.check(rel_close(z.exp(), expect, 1e-12), || format!("{name}: exact Z({p}, 1) = {} vs {expect}", z.exp())),
                Err(e) => t.error(&name, e),
            }
        }
        let expect_tutte = 2f64.powi(m.n() as i32);
        match exact_tutte(&m, 2.0, 2.0) {
            Ok(v) => t.check(v == expect_tutte, || format!("{name}: exact T(2,2) = {v} vs {expect_tutte}")),
            Err(e) => t.error(&name, e),
        }
        // Estimator checks stay on the smaller instances; the sampled cost
        // grows roughly with the cube of the number of levels.
        if m.n() > 7 {
            continue;
        }
        match cluster_partition(&m, 0.5, 1.0, &cfg) {
            Ok(r) => {
                let expect = 1.5f64.powi(m.n() as i32);
                t.check(rel_close(r.estimate, expect, 0.1), || format!("{name}: estimated Z(0.5, 1) = {} vs {expect}", r.estimate))
            }
            Err(e) => t.error(&name, e),
        }
        match tutte_eval(&m, 2.0, 2.0, &cfg) {
            Ok(r) => t.check(rel_close(r.estimate, expect_tutte, 0.1), || {
                format!("{name}: estimated T(2,2) = {} vs {expect_tutte}", r.estimate)
            }),
            Err(e) => t.error(&name, e),
        }
    }
    for (n, k) in [(4, 2), (6, 3), (8, 4), (8, 1), (5, 5)] {
        let expect = binomial(n, k);
        let id = DppKernel::identity(n);
        match exact_dpp_partition(&id, k, 0.5) {
            Ok(v) => t.check(rel_close(v, expect, 1e-12), || format!("exact DPP with L = I ({n}, {k}) = {v}")),
            Err(e) => t.error("dpp", e),
        }
        match dpp_partition(&id, k, 0.5, &cfg) {
            Ok(r) => t.check(rel_close(r.estimate, expect, 0.1), || format!("estimated DPP with L = I ({n}, {k}) = {}", r.estimate)),
            Err(e) => t.error("dpp", e),
        }
    }
    let u12 = Matroid::uniform(2, 1).unwrap();
    for p in [0.0, 0.2, 0.5, 0.9, 1.0] {
        let expect = 1.0 - p * p;
        match reliability(&u12, p, &cfg) {
            Ok(r) => t.check((r.estimate - expect).abs() <= 1e-12, || format!("reliability of U(1,2) at {p} = {}", r.estimate)),
            Err(e) => t.error("reliability", e),
        }
    }
    t
}

fn determinism(opts: &SuiteOptions) -> Tally {
    let mut t = Tally::default();
    let multi = opts.workers.max(3);
    let k4 = Matroid::complete_graph(4);
    let mu = HomogeneousDistribution::uniform_bases(k4.clone(), None).unwrap();
    let draw = |workers| {
        let cfg = SamplerConfig { workers, ..SamplerConfig::new(opts.seed, 0.01) };
        sample_tagged(&mu, 200, &cfg, &[]).map(|r| r.samples)
    };
    match (draw(1), draw(1), draw(multi)) {
        (Ok(a), Ok(b), Ok(c)) => t.check(a == b && a == c, || "samples differ across reruns or worker counts".into()),
        _ => t.check(false, || "sampling failed".into()),
    }
    let estimators: Vec<(&str, Box<dyn Fn(&EstimateConfig) -> Result<crate::counting::EstimateReport>>)> = vec![
        ("count_bases", Box::new(|c| count_bases(&Matroid::complete_graph(4), c))),
        ("cluster", Box::new(|c| cluster_partition(&Matroid::complete_graph(4), 1.0, 0.5, c))),
        ("reliability", Box::new(|c| reliability(&Matroid::complete_graph(4), 0.5, c))),
        ("tutte", Box::new(|c| tutte_eval(&Matroid::complete_graph(4), 1.5, 2.0, c))),
        ("dpp", Box::new(|c| dpp_partition(&random_psd_kernel(6, 6, 2), 3, 0.5, c))),
    ];
    for (name, run) in estimators {
        let json = |workers| {
            let cfg = EstimateConfig { workers, ..EstimateConfig::new(0.2, 0.1, opts.seed) };
            run(&cfg).map(|r| serde_json::to_string(&r).unwrap())
        };
        match (json(1), json(1), json(multi)) {
            (Ok(a), Ok(b), Ok(c)) => t.check(a == b && a == c, || format!("{name}: report differs across reruns or worker counts")),
            _ => t.check(false, || format!("{name}: estimator failed")),
        }
    }
    t
}
