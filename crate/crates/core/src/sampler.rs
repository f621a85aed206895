//! The down-up chain: drop a uniformly random element of the current set,
//! then add one back in proportion to the weight of the resulting set.

use nalgebra::DVector;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complex_spectra::{lower_walk, WeightedComplex};
use crate::distributions::HomogeneousDistribution;
use crate::error::{Error, Result};
use crate::logspace::choose_proportional;
use crate::rng::{substream, ChainRng};
use crate::subset::{ln_binomial, Subset};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Steps {
    Auto,
    Fixed(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BurnIn {
    /// Every sample comes from its own chain run from the initial state.
    FreshChain,
    /// One chain: after the initial run, record a sample every `interval` steps.
    Thinning(u64),
}

#[derive(Debug, Clone, Copy)]
pub struct SamplerConfig {
    pub seed: u64,
    pub epsilon: f64,
    pub steps: Steps,
    pub burn_in: BurnIn,
    pub workers: usize,
}

impl SamplerConfig {
    pub fn new(seed: u64, epsilon: f64) -> SamplerConfig {
        SamplerConfig { seed, epsilon, steps: Steps::Auto, burn_in: BurnIn::FreshChain, workers: 1 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::input_at("eps", format!("epsilon {} outside (0, 1)", self.epsilon)));
        }
        if self.burn_in == BurnIn::Thinning(0) {
            return Err(Error::input_at("thin", "thinning interval must be positive"));
        }
        if self.workers == 0 {
            return Err(Error::input_at("workers", "at least one worker is required"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ChainState {
    pub current: Subset,
    pub step_count: u64,
    pub rng: ChainRng,
}

impl ChainState {
    pub fn new(current: Subset, rng: ChainRng) -> ChainState {
        ChainState { current, step_count: 0, rng }
    }
}

/// A chain with reusable buffers for the inner loop.
pub struct Chain<'a> {
    mu: &'a HomogeneousDistribution,
    current: Vec<usize>,
    steps: u64,
    rng: ChainRng,
    rest: Vec<usize>,
    cands: Vec<(usize, f64)>,
    logw: Vec<f64>,
}

impl<'a> Chain<'a> {
    pub fn new(mu: &'a HomogeneousDistribution, state: ChainState) -> Chain<'a> {
        let d = state.current.len();
        Chain {
            mu,
            current: state.current.into_vec(),
            steps: state.step_count,
            rng: state.rng,
            rest: Vec::with_capacity(d),
            cands: Vec::with_capacity(mu.n()),
            logw: Vec::with_capacity(mu.n()),
        }
    }

    pub fn current(&self) -> &[usize] {
        &self.current
    }

    pub fn step(&mut self) -> Result<()> {
        self.steps += 1;
        let d = self.current.len();
        if d == 0 {
            return Ok(());
        }
        let drop = self.rng.gen_range(0..d);
        self.rest.clear();
        self.rest.extend(self.current.iter().enumerate().filter(|&(i, _)| i != drop).map(|(_, &x)| x));
        self.mu.candidates_into(&self.rest, &mut self.cands);
        self.logw.clear();
        self.logw.extend(self.cands.iter().map(|c| c.1));
        let u: f64 = self.rng.gen();
        let pick = choose_proportional(&self.logw, u).ok_or_else(|| {
            Error::State(format!("{:?} has no extension in the support", Subset::from_sorted(self.rest.clone())))
        })?;
        let j = self.cands[pick].0;
        let pos = self.rest.partition_point(|&x| x < j);
        self.current.clear();
        self.current.extend_from_slice(&self.rest[..pos]);
        self.current.push(j);
        self.current.extend_from_slice(&self.rest[pos..]);
        Ok(())
    }

    pub fn run(&mut self, steps: u64) -> Result<()> {
        for _ in 0..steps {
            self.step()?;
        }
        Ok(())
    }

    pub fn into_state(self) -> ChainState {
        ChainState { current: Subset::from_sorted(self.current), step_count: self.steps, rng: self.rng }
    }
}

/// One transition of the chain.
pub fn step(mu: &HomogeneousDistribution, state: ChainState) -> Result<ChainState> {
    let mut chain = Chain::new(mu, state);
    chain.step()?;
    Ok(chain.into_state())
}

/// `⌈d · (−log ε − log μ(τ))⌉`, floored at zero.
pub fn mixing_bound(d: usize, log_mu_tau: f64, epsilon: f64) -> u64 {
    let t = d as f64 * (-epsilon.ln() - log_mu_tau);
    if t <= 0.0 {
        0
    } else {
        t.ceil() as u64
    }
}

/// `⌈r · log(n^r / ε)⌉`, the bound for uniformly weighted bases of a rank-`r`
/// matroid on `n` elements started anywhere.
pub fn mixing_bound_surrogate(n: usize, r: usize, epsilon: f64) -> u64 {
    mixing_bound(r, -(r as f64) * (n as f64).ln(), epsilon)
}

/// A lower bound on `log μ(start)` for the normalized distribution that needs
/// no enumeration: the partition function is at most `C(n, d)` times an
/// upper bound on the largest weight.
pub fn log_mu_lower_bound(mu: &HomogeneousDistribution, start: &Subset) -> Result<f64> {
    let w = mu.log_weight(start)?.0;
    if w == f64::NEG_INFINITY {
        return Err(Error::input(format!("{start:?} is outside the support")));
    }
    Ok((w - ln_binomial(mu.n(), mu.d()) - mu.log_weight_upper_bound()).min(0.0))
}

/// Step count used for `Steps::Auto` from `start`.
pub fn auto_steps(mu: &HomogeneousDistribution, start: &Subset, epsilon: f64) -> Result<u64> {
    Ok(mixing_bound(mu.d(), log_mu_lower_bound(mu, start)?, epsilon))
}

#[derive(Debug, Clone)]
pub struct SampleRun {
    pub samples: Vec<Subset>,
    pub steps_used: u64,
    pub oracle_calls: u64,
}

/// Runs `f` on a pool of `workers` threads, or inline for a single worker.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if workers <= 1 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Resource(format!("cannot start {workers} workers: {e}")))?;
    Ok(pool.install(f))
}

/// Draws `count` samples. With fresh chains, chain `c` uses the random stream
/// keyed by `(seed, tags…, c)`, so the output does not depend on the number of
/// workers.
pub fn sample_tagged(mu: &HomogeneousDistribution, count: usize, cfg: &SamplerConfig, tags: &[u64]) -> Result<SampleRun> {
    cfg.validate()?;
    let calls_before = mu.oracle_calls();
    let start = mu.initial_state()?;
    let steps = match cfg.steps {
        Steps::Fixed(t) => t,
        Steps::Auto => auto_steps(mu, &start, cfg.epsilon)?,
    };
    let samples = match cfg.burn_in {
        BurnIn::FreshChain => {
            let run_one = |c: usize| -> Result<Subset> {
                let mut path = tags.to_vec();
                path.push(c as u64);
                let mut chain = Chain::new(mu, ChainState::new(start.clone(), substream(cfg.seed, &path)));
                chain.run(steps)?;
                Ok(Subset::from_sorted(chain.current.clone()))
            };
            if cfg.workers <= 1 {
                (0..count).map(run_one).collect::<Result<Vec<_>>>()?
            } else {
                with_workers(cfg.workers, || (0..count).into_par_iter().map(run_one).collect::<Result<Vec<_>>>())??
            }
        }
        BurnIn::Thinning(interval) => {
            let mut chain = Chain::new(mu, ChainState::new(start.clone(), substream(cfg.seed, tags)));
            let mut out = Vec::with_capacity(count);
            if count > 0 {
                chain.run(steps)?;
                out.push(Subset::from_sorted(chain.current.clone()));
            }
            while out.len() < count {
                chain.run(interval)?;
                out.push(Subset::from_sorted(chain.current.clone()));
            }
            out
        }
    };
    Ok(SampleRun { samples, steps_used: steps, oracle_calls: mu.oracle_calls() - calls_before })
}

pub fn sample(mu: &HomogeneousDistribution, count: usize, cfg: &SamplerConfig) -> Result<SampleRun> {
    sample_tagged(mu, count, cfg, &[])
}

/// The materialized chain on the support of `μ` together with its
/// stationary distribution.
pub struct ExactChain {
    pub faces: Vec<Subset>,
    pub transition: nalgebra::DMatrix<f64>,
    pub stationary: Vec<f64>,
}

pub fn exact_chain(mu: &HomogeneousDistribution, cap: usize) -> Result<ExactChain> {
    let (p, _) = mu.materialize_scaled(cap)?;
    let x = WeightedComplex::from_polynomial(&p)?;
    if mu.d() == 0 {
        return Ok(ExactChain {
            faces: vec![Subset::empty()],
            transition: nalgebra::DMatrix::identity(1, 1),
            stationary: vec![1.0],
        });
    }
    let walk = lower_walk(&x, mu.d())?;
    let total: f64 = walk.weights.iter().sum();
    let stationary = walk.weights.iter().map(|w| w / total).collect();
    Ok(ExactChain { faces: walk.faces, transition: walk.matrix, stationary })
}

/// `‖P^t(start, ·) − π‖₁` for `t = 0, ..., t_max`, by repeated
/// vector-matrix products on the materialized chain.
pub fn exact_tv_curve(mu: &HomogeneousDistribution, start: &Subset, t_max: u64, cap: usize) -> Result<Vec<(u64, f64)>> {
    let chain = exact_chain(mu, cap)?;
    let m = chain.faces.len();
    let s = chain
        .faces
        .binary_search(start)
        .map_err(|_| Error::input(format!("{start:?} is outside the support")))?;
    let pt = chain.transition.transpose();
    let pi = DVector::from_vec(chain.stationary);
    let mut v = DVector::zeros(m);
    v[s] = 1.0;
    let mut out = Vec::with_capacity(t_max as usize + 1);
    for t in 0..=t_max {
        out.push((t, (&v - &pi).abs().sum()));
        if t < t_max {
            v = &pt * v;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matroids::Matroid;

    fn u24() -> HomogeneousDistribution {
        HomogeneousDistribution::uniform_bases(Matroid::uniform(4, 2).unwrap(), None).unwrap()
    }

    #[test]
    fn mixing_bound_examples() {
        assert_eq!(mixing_bound(2, (1.0f64 / 6.0).ln(), 0.01), 13);
        assert_eq!(mixing_bound_surrogate(6, 3, 0.01), 30);
        assert_eq!(mixing_bound(3, 0.0, 1.0), 0);
        assert_eq!(mixing_bound(3, 0.0, 1.0 - 1e-12), 1);
    }

    #[test]
    fn single_basis_step_is_identity() {
        let mu = HomogeneousDistribution::uniform_bases(Matroid::uniform(2, 2).unwrap(), None).unwrap();
        let start = mu.initial_state().unwrap();
        let mut state = ChainState::new(start.clone(), substream(1, &[]));
        for _ in 0..10 {
            state = step(&mu, state).unwrap();
            assert_eq!(state.current, start);
        }
        assert_eq!(state.step_count, 10);
    }

    #[test]
    fn zero_samples_and_determinism() {
        let cfg = SamplerConfig::new(11, 0.05);
        assert!(sample(&u24(), 0, &cfg).unwrap().samples.is_empty());
        let a = sample(&u24(), 50, &cfg).unwrap();
        let b = sample(&u24(), 50, &cfg).unwrap();
        assert_eq!(a.samples, b.samples);
        let c = sample(&u24(), 50, &SamplerConfig { workers: 3, ..cfg }).unwrap();
        assert_eq!(a.samples, c.samples);
        assert!(sample(&u24(), 1, &SamplerConfig { epsilon: 1.5, ..cfg }).is_err());
    }

    #[test]
    fn tv_curve_examples() {
        let mu = u24();
        let start = Subset::new(vec![0, 1]).unwrap();
        let curve = exact_tv_curve(&mu, &start, 13, 100).unwrap();
        assert!((curve[0].1 - 2.0 * (5.0 / 6.0)).abs() < 1e-12);
        assert!(curve[13].1 <= 0.01);
        for w in curve.windows(2) {
            assert!(w[1].1 <= w[0].1 + 1e-12);
        }
    }
}
