//! Weighted pure simplicial complexes generated by multiaffine polynomials,
//! the random walks between their levels, and dense spectral certificates.
//!
//! Levels are indexed by face cardinality: level `k` holds the faces of size
//! `k`, so the maximal faces of a degree-`d` polynomial sit at level `d` and
//! level `0` holds only the empty face.

mod checks;
mod walks;

use std::collections::HashMap;

use crate::distributions::ExplicitPolynomial;
use crate::error::{Error, Result};
use crate::logspace::KahanSum;
use crate::subset::Subset;

pub use self::checks::{
    check_strong_log_concavity, check_zero_local_expander, eigenvalue_count_check, eigenvalue_count_table,
    loewner_domination_check,
    shared_spectrum_check, spectral_gap_check, CheckReport, CountRow,
};
pub use self::walks::{local_walk, lower_walk, normalized_hessian, spectrum, upper_walk, Spectrum, WalkMatrix};

/// Default absolute tolerance for eigenvalue comparisons.
pub const EIGEN_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct WeightedComplex {
    n: usize,
    d: usize,
    levels: Vec<Vec<Subset>>,
    weights: Vec<Vec<f64>>,
    index: Vec<HashMap<Subset, usize>>,
}

impl WeightedComplex {
    /// Maximal faces are the support of `p` weighted by its coefficients;
    /// every other face gets the sum of the weights of the faces one level up
    /// that contain it.
    pub fn from_polynomial(p: &ExplicitPolynomial) -> Result<WeightedComplex> {
        if p.is_zero() {
            return Err(Error::input("polynomial has empty support"));
        }
        let d = p.d();
        let mut levels: Vec<Vec<Subset>> = vec![Vec::new(); d + 1];
        let mut weights: Vec<Vec<f64>> = vec![Vec::new(); d + 1];
        for (s, c) in p.terms() {
            levels[d].push(s.clone());
            weights[d].push(c);
        }
        for k in (0..d).rev() {
            let mut acc: HashMap<Subset, KahanSum> = HashMap::new();
            for (sigma, &w) in levels[k + 1].iter().zip(&weights[k + 1]) {
                for i in sigma.iter() {
                    acc.entry(sigma.without(i)).or_default().add(w);
                }
            }
            let mut faces: Vec<(Subset, f64)> = acc.into_iter().map(|(s, sum)| (s, sum.total())).collect();
            faces.sort_by(|a, b| a.0.cmp(&b.0));
            (levels[k], weights[k]) = faces.into_iter().unzip();
        }
        Ok(WeightedComplex::assemble(p.n(), d, levels, weights))
    }

    fn assemble(n: usize, d: usize, levels: Vec<Vec<Subset>>, weights: Vec<Vec<f64>>) -> WeightedComplex {
        let index = levels
            .iter()
            .map(|faces| faces.iter().enumerate().map(|(i, f)| (f.clone(), i)).collect())
            .collect();
        WeightedComplex { n, d, levels, weights, index }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Faces of size `k`, sorted lexicographically. Empty beyond `d`.
    pub fn level(&self, k: usize) -> &[Subset] {
        self.levels.get(k).map_or(&[], Vec::as_slice)
    }

    pub fn level_weights(&self, k: usize) -> &[f64] {
        self.weights.get(k).map_or(&[], Vec::as_slice)
    }

    /// `|X(i)|` with the convention `|X(-1)| = 0`.
    pub fn level_size(&self, i: isize) -> usize {
        if i < 0 {
            0
        } else {
            self.level(i as usize).len()
        }
    }

    pub fn face_index(&self, face: &Subset) -> Option<usize> {
        self.index.get(face.len())?.get(face).copied()
    }

    pub fn contains(&self, face: &Subset) -> bool {
        self.face_index(face).is_some()
    }

    pub fn weight(&self, face: &Subset) -> Option<f64> {
        self.face_index(face).map(|i| self.weights[face.len()][i])
    }

    /// The complex of faces `σ ∖ τ` for `σ ⊇ τ`, with weights inherited
    /// from `σ`. Labels are unchanged; elements of `τ` simply never occur.
    pub fn link(&self, tau: &Subset) -> Result<WeightedComplex> {
        if !self.contains(tau) {
            return Err(Error::input(format!("{tau:?} is not a face")));
        }
        let t = tau.len();
        let d = self.d - t;
        let mut levels = vec![Vec::new(); d + 1];
        let mut weights = vec![Vec::new(); d + 1];
        for k in t..=self.d {
            for (sigma, &w) in self.levels[k].iter().zip(&self.weights[k]) {
                if tau.is_subset_of(sigma) {
                    levels[k - t].push(sigma.difference(tau));
                    weights[k - t].push(w);
                }
            }
        }
        Ok(WeightedComplex::assemble(self.n, d, levels, weights))
    }

    /// Largest relative deviation from `w(τ) = Σ_{σ ⊃ τ, |σ| = |τ|+1} w(σ)`
    /// over non-maximal faces, together with a purity and closure check.
    pub fn balance_error(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for k in 0..self.d {
            let mut sums = vec![KahanSum::default(); self.levels[k].len()];
            for (sigma, &w) in self.levels[k + 1].iter().zip(&self.weights[k + 1]) {
                for i in sigma.iter() {
                    let tau = sigma.without(i);
                    let idx = self.index[k]
                        .get(&tau)
                        .ok_or_else(|| Error::Numeric(format!("{tau:?} missing below {sigma:?}")))?;
                    sums[*idx].add(w);
                }
            }
            for (j, s) in sums.iter().enumerate() {
                let w = self.weights[k][j];
                if s.total() == 0.0 {
                    return Err(Error::Numeric(format!("{:?} lies in no face one level up", self.levels[k][j])));
                }
                worst = worst.max((s.total() - w).abs() / w.abs());
            }
        }
        Ok(worst)
    }

    /// Largest relative deviation from `w(τ) = (d − |τ|)! · p_τ(1)`.
    pub fn factorial_identity_error(&self, p: &ExplicitPolynomial) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 0..=self.d {
            let fact: f64 = (1..=self.d - k).map(|x| x as f64).product();
            for (tau, &w) in self.levels[k].iter().zip(&self.weights[k]) {
                let expect = fact * p.derivative_link(tau).eval_at_one();
                worst = worst.max((w - expect).abs() / expect.abs());
            }
        }
        worst
    }

    /// All faces of size at most `max_size`, level by level.
    pub fn faces_up_to(&self, max_size: usize) -> impl Iterator<Item = &Subset> + '_ {
        self.levels.iter().take(max_size + 1).flatten()
    }
}
