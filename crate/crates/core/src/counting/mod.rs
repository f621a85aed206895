//! Partition-function estimators built on the down-up sampler through
//! self-reducibility: estimate a marginal, condition on it, and recurse until
//! the remaining layer is small enough to sum directly.

mod schedule;

pub use schedule::{AccuracySchedule, Direction};

use serde::{Deserialize, Serialize};

use crate::distributions::{DppKernel, HomogeneousDistribution};
use crate::error::{Error, Result};
use crate::exact_oracle::exact_marginals;
use crate::logspace::{log_sum_exp, LogAccumulator};
use crate::matroids::Matroid;
use crate::sampler::{sample_tagged, BurnIn, SamplerConfig, Steps};
use crate::subset::{k_subsets, ln_binomial};

/// Where telescoping levels get their marginals from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Marginals {
    Sampled,
    /// Exhaustive marginals; isolates the recursion from the statistics.
    Exact,
}

#[derive(Debug, Clone, Copy)]
pub struct EstimateConfig {
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
    pub workers: usize,
    pub marginals: Marginals,
    /// One line per telescoping level on stderr.
    pub verbose: bool,
}

impl EstimateConfig {
    pub fn new(epsilon: f64, delta: f64, seed: u64) -> EstimateConfig {
        EstimateConfig { epsilon, delta, seed, workers: 1, marginals: Marginals::Sampled, verbose: false }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::input_at("eps", format!("epsilon {} outside (0, 1)", self.epsilon)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::input_at("delta", format!("delta {} outside (0, 1)", self.delta)));
        }
        if self.workers == 0 {
            return Err(Error::input_at("workers", "at least one worker is required"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub level: usize,
    pub direction: Direction,
    /// Label of the conditioned element in the term's ground set.
    pub element: usize,
    /// Estimated probability of the conditioned event.
    pub marginal: f64,
    pub samples: u64,
    pub steps_per_sample: u64,
}

/// One positive summand `exp(log_prefactor) · Z(layer)` of an estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermEstimate {
    /// Layer size, for estimators that sum over sizes.
    pub k: usize,
    pub log_prefactor: f64,
    pub log_layer: f64,
    pub log_term: f64,
    pub exact: bool,
    pub epsilon: f64,
    pub delta: f64,
    pub schedule: AccuracySchedule,
    pub levels: Vec<LevelRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub estimate: f64,
    pub log_estimate: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub samples_used: u64,
    pub oracle_calls: u64,
    pub seed: u64,
    pub breakdown: Vec<TermEstimate>,
}

/// Fraction of `m` independent samples containing `element`.
pub fn estimate_marginal(mu: &HomogeneousDistribution, element: usize, m: usize, cfg: &SamplerConfig) -> Result<f64> {
    if element >= mu.n() {
        return Err(Error::input(format!("element {element} outside ground set of size {}", mu.n())));
    }
    if m == 0 {
        return Err(Error::input("at least one sample is required"));
    }
    let run = sample_tagged(mu, m, cfg, &[])?;
    Ok(run.samples.iter().filter(|s| s.contains(element)).count() as f64 / m as f64)
}

/// Direct sum for layers with at most `n` members.
fn small_layer(mu: &HomogeneousDistribution) -> f64 {
    let mut acc = LogAccumulator::default();
    for s in k_subsets(mu.n(), mu.d()) {
        acc.add(mu.log_weight_slice(s.as_slice()));
    }
    acc.log_total()
}

/// `log Z(μ)` by telescoping, `(1 ± eps)`-accurate with probability `1 − delta`.
/// `tag` separates the random streams of different terms.
fn telescope(mu: &HomogeneousDistribution, k: usize, eps: f64, delta: f64, cfg: &EstimateConfig, tag: u64) -> Result<TermEstimate> {
    let schedule = AccuracySchedule::plan(mu.n(), mu.d(), eps, delta);
    let mut levels = Vec::with_capacity(schedule.levels);
    let mut labels: Vec<usize> = (0..mu.n()).collect();
    let mut cur = mu.clone();
    let mut log_z = 0.0;
    for j in 0..schedule.levels {
        let (presence, samples, steps) = match cfg.marginals {
            Marginals::Exact => (exact_marginals(&cur, crate::dense_cap())?, 0, 0),
            Marginals::Sampled => {
                let m = schedule.samples_per_level[j];
                let scfg = SamplerConfig {
                    seed: cfg.seed,
                    epsilon: schedule.chain_tv[j],
                    steps: Steps::Auto,
                    burn_in: BurnIn::FreshChain,
                    workers: cfg.workers,
                };
                let run = sample_tagged(&cur, m as usize, &scfg, &[tag, j as u64])?;
                let mut counts = vec![0u64; cur.n()];
                for s in &run.samples {
                    for i in s.iter() {
                        counts[i] += 1;
                    }
                }
                (counts.iter().map(|&c| c as f64 / m as f64).collect::<Vec<_>>(), m, run.steps_used)
            }
        };
        let event: Vec<f64> = match schedule.direction {
            Direction::Contract => presence,
            Direction::Delete => presence.iter().map(|q| 1.0 - q).collect(),
        };
        // First maximum, so ties go to the lowest label.
        let (e, q) = event.iter().copied().enumerate().fold((0, f64::NEG_INFINITY), |best, (i, q)| if q > best.1 { (i, q) } else { best });
        if q <= 0.0 {
            return Err(Error::Numeric(format!("level {j}: every estimated marginal is zero")));
        }
        cur = match schedule.direction {
            Direction::Contract => {
                let (factor, next) = cur.condition_on(e)?;
                log_z += factor;
                next
            }
            Direction::Delete => cur.exclude(e)?,
        };
        log_z -= q.ln();
        let element = labels.remove(e);
        if cfg.verbose {
            eprintln!("term {k} level {j}: {:?} element {element}, marginal {q:.5} from {samples} samples", schedule.direction);
        }
        levels.push(LevelRecord { level: j, direction: schedule.direction, element, marginal: q, samples, steps_per_sample: steps });
    }
    log_z += small_layer(&cur);
    Ok(TermEstimate {
        k,
        log_prefactor: 0.0,
        log_layer: log_z,
        log_term: log_z,
        exact: schedule.levels == 0,
        epsilon: eps,
        delta,
        schedule,
        levels,
    })
}

struct Term {
    k: usize,
    log_prefactor: f64,
    layer: HomogeneousDistribution,
}

/// Sums positive terms. Terms needing no sampling are exact; the others share
/// one relative accuracy, loosened by the exact part's share of a crude upper
/// bound on the total, and split `delta` evenly.
fn estimate_sum(terms: Vec<Term>, cfg: &EstimateConfig, calls: impl Fn() -> u64) -> Result<EstimateReport> {
    cfg.validate()?;
    let calls_before = calls();
    let terms: Vec<Term> = terms.into_iter().filter(|t| t.log_prefactor > f64::NEG_INFINITY).collect();
    let sampled = |t: &Term| AccuracySchedule::plan(t.layer.n(), t.layer.d(), cfg.epsilon, cfg.delta).levels > 0;
    let n_sampled = terms.iter().filter(|t| sampled(t)).count();
    let mut breakdown = Vec::with_capacity(terms.len());
    for t in terms.iter().filter(|t| !sampled(t)) {
        breakdown.push(finish(telescope(&t.layer, t.k, cfg.epsilon, cfg.delta, cfg, t.k as u64)?, t.log_prefactor));
    }
    let log_exact = log_sum_exp(breakdown.iter().map(|b| b.log_term));
    let log_upper = log_sum_exp(
        terms.iter().filter(|t| sampled(t)).map(|t| t.log_prefactor + ln_binomial(t.layer.n(), t.layer.d()) + t.layer.log_weight_upper_bound()),
    );
    let eps_term = (cfg.epsilon * (1.0 + (log_exact - log_upper).exp())).min(cfg.epsilon.max(0.5));
    let delta_term = cfg.delta / n_sampled.max(1) as f64;
    for t in terms.iter().filter(|t| sampled(t)) {
        breakdown.push(finish(telescope(&t.layer, t.k, eps_term, delta_term, cfg, t.k as u64)?, t.log_prefactor));
    }
    breakdown.sort_by_key(|b| b.k);
    let log_estimate = log_sum_exp(breakdown.iter().map(|b| b.log_term));
    Ok(EstimateReport {
        estimate: log_estimate.exp(),
        log_estimate,
        epsilon: cfg.epsilon,
        delta: cfg.delta,
        samples_used: breakdown.iter().flat_map(|b| b.levels.iter()).map(|l| l.samples).sum(),
        oracle_calls: calls() - calls_before,
        seed: cfg.seed,
        breakdown,
    })
}

fn finish(mut t: TermEstimate, log_prefactor: f64) -> TermEstimate {
    t.log_prefactor = log_prefactor;
    t.log_term = log_prefactor + t.log_layer;
    t
}

/// `Z(μ) = Σ_S μ(S)` for any supported distribution.
pub fn estimate_partition(mu: &HomogeneousDistribution, cfg: &EstimateConfig) -> Result<EstimateReport> {
    let term = Term { k: mu.d(), log_prefactor: 0.0, layer: mu.clone() };
    estimate_sum(vec![term], cfg, || mu.oracle_calls())
}

/// Number of bases. A rank-0 matroid gives exactly 1 without sampling.
pub fn count_bases(m: &Matroid, cfg: &EstimateConfig) -> Result<EstimateReport> {
    let mu = HomogeneousDistribution::uniform_bases(m.clone(), None)?;
    estimate_sum(vec![Term { k: m.rank(), log_prefactor: 0.0, layer: mu }], cfg, || m.oracle_calls())
}

/// Number of independent sets of size `k`, as the bases of the truncation.
pub fn count_independent_sets(m: &Matroid, k: usize, cfg: &EstimateConfig) -> Result<EstimateReport> {
    if k > m.rank() {
        return Err(Error::input_at("k", format!("size {k} exceeds the rank {}", m.rank())));
    }
    let mu = HomogeneousDistribution::uniform_bases(m.truncate(k)?, None)?;
    estimate_sum(vec![Term { k, log_prefactor: 0.0, layer: mu }], cfg, || m.oracle_calls())
}

/// `C_M(p) = Σ_{S spanning} (1 − p)^{|S|} p^{n − |S|}`, summed by the number
/// `k` of removed elements: removable sets are the independent sets of the dual.
pub fn reliability(m: &Matroid, p: f64, cfg: &EstimateConfig) -> Result<EstimateReport> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::input_at("p", format!("probability {p} outside [0, 1]")));
    }
    let (n, r) = (m.n(), m.rank());
    let dual = m.dual();
    let log_pow = |base: f64, e: usize| if e == 0 { 0.0 } else { e as f64 * base.ln() };
    let mut terms = Vec::new();
    for k in 0..=n - r {
        let layer = HomogeneousDistribution::uniform_bases(dual.truncate(k)?, None)?;
        terms.push(Term { k, log_prefactor: log_pow(1.0 - p, n - k) + log_pow(p, k), layer });
    }
    estimate_sum(terms, cfg, || m.oracle_calls())
}

/// `Z_M(p, q) = q^{r+1} Σ_k p^k f_{M,k,q}(1)` with `f_{M,k,q}(1) = Σ_{|S|=k} q^{−rank S}`.
pub fn cluster_partition(m: &Matroid, p: f64, q: f64, cfg: &EstimateConfig) -> Result<EstimateReport> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::input_at("q", format!("q = {q} outside (0, 1]")));
    }
    if !(p >= 0.0 && p.is_finite()) {
        return Err(Error::input_at("p", format!("p = {p} must be a non-negative real")));
    }
    let lead = (m.rank() + 1) as f64 * q.ln();
    let mut terms = Vec::new();
    for k in 0..=m.n() {
        let log_pk = if k == 0 { 0.0 } else { k as f64 * p.ln() };
        terms.push(Term { k, log_prefactor: lead + log_pk, layer: HomogeneousDistribution::cluster_layer(m.clone(), k, q, None)? });
    }
    estimate_sum(terms, cfg, || m.oracle_calls())
}

/// `T_M(x, y) = Z_M(y − 1, (x − 1)(y − 1)) / ((x − 1)(y − 1)^{r+1})` for
/// `x > 1`, `y > 1` and `(x − 1)(y − 1) ≤ 1`.
pub fn tutte_eval(m: &Matroid, x: f64, y: f64, cfg: &EstimateConfig) -> Result<EstimateReport> {
    if !x.is_finite() || !y.is_finite() {
        return Err(Error::input("x and y must be finite"));
    }
    if x <= 1.0 {
        return Err(Error::input_at("x", format!("x > 1 violated by x = {x}")));
    }
    if y < 1.0 {
        return Err(Error::input_at("y", format!("y >= 1 violated by y = {y}")));
    }
    if y == 1.0 {
        return Err(Error::input_at("y", "(x-1)(y-1) > 0 violated: y = 1 gives q = 0, outside the sampler's range"));
    }
    let q = (x - 1.0) * (y - 1.0);
    if q > 1.0 {
        return Err(Error::input(format!("(x-1)(y-1) <= 1 violated: (x-1)(y-1) = {q}")));
    }
    let mut report = cluster_partition(m, y - 1.0, q, cfg)?;
    report.log_estimate -= (x - 1.0).ln() + (m.rank() + 1) as f64 * (y - 1.0).ln();
    report.estimate = report.log_estimate.exp();
    Ok(report)
}

/// `Σ_{|S|=k} det(L_S)^α`.
pub fn dpp_partition(kernel: &DppKernel, k: usize, alpha: f64, cfg: &EstimateConfig) -> Result<EstimateReport> {
    let mu = HomogeneousDistribution::dpp_alpha(kernel.clone(), k, alpha)?;
    mu.initial_state().map_err(|_| Error::input("the support is empty: every k-minor vanishes"))?;
    estimate_partition(&mu, cfg)
}
