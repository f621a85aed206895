//! Multiaffine homogeneous polynomials given by their coefficient maps.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::logspace::KahanSum;
use crate::subset::Subset;

/// `p(x) = Σ_S c_S x^S` over size-`d` subsets of `[n]`, with every stored
/// coefficient strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitPolynomial {
    n: usize,
    d: usize,
    coeffs: BTreeMap<Subset, f64>,
}

impl ExplicitPolynomial {
    /// Builds the polynomial, dropping zero coefficients. Keys must have size
    /// `d`, lie in `[n]`, and appear at most once.
    pub fn new(n: usize, d: usize, terms: impl IntoIterator<Item = (Subset, f64)>) -> Result<Self> {
        let mut coeffs = BTreeMap::new();
        for (pos, (set, c)) in terms.into_iter().enumerate() {
            let path = format!("terms[{pos}]");
            set.check_range(n).map_err(|e| e.within(&format!("{path}.set")))?;
            if set.len() != d {
                return Err(Error::input_at(
                    format!("{path}.set"),
                    format!("term {set:?} has size {} but the polynomial has degree {d}", set.len()),
                ));
            }
            if !c.is_finite() || c < 0.0 {
                return Err(Error::input_at(format!("{path}.coef"), format!("coefficient {c} must be finite and nonnegative")));
            }
            if coeffs.contains_key(&set) {
                return Err(Error::input_at(format!("{path}.set"), format!("term {set:?} repeated")));
            }
            if c > 0.0 {
                coeffs.insert(set, c);
            } else {
                // Recorded so later duplicates of a zero term are still caught.
                coeffs.insert(set, 0.0);
            }
        }
        coeffs.retain(|_, c| *c > 0.0);
        Ok(ExplicitPolynomial { n, d, coeffs })
    }

    pub(crate) fn from_map(n: usize, d: usize, coeffs: BTreeMap<Subset, f64>) -> Self {
        debug_assert!(coeffs.iter().all(|(s, &c)| s.len() == d && c > 0.0));
        ExplicitPolynomial { n, d, coeffs }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coefficient(&self, set: &Subset) -> f64 {
        self.coeffs.get(set).copied().unwrap_or(0.0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Subset, f64)> + '_ {
        self.coeffs.iter().map(|(s, &c)| (s, c))
    }

    pub(crate) fn coeff_map(&self) -> &BTreeMap<Subset, f64> {
        &self.coeffs
    }

    /// `p_τ = (Π_{i∈τ} ∂_i) p`, on the same ground set.
    pub fn derivative_link(&self, tau: &Subset) -> ExplicitPolynomial {
        let d = self.d.saturating_sub(tau.len());
        if tau.len() > self.d {
            return ExplicitPolynomial { n: self.n, d, coeffs: BTreeMap::new() };
        }
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(s, _)| tau.is_subset_of(s))
            .map(|(s, &c)| (s.difference(tau), c))
            .collect();
        ExplicitPolynomial { n: self.n, d, coeffs }
    }

    /// Coefficients raised to the power `alpha ∈ [0, 1]`.
    pub fn alpha_power(&self, alpha: f64) -> Result<ExplicitPolynomial> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::input_at("alpha", format!("exponent {alpha} outside [0, 1]")));
        }
        let coeffs = self.coeffs.iter().map(|(s, &c)| (s.clone(), c.powf(alpha))).collect();
        Ok(ExplicitPolynomial { n: self.n, d: self.d, coeffs })
    }

    /// Multiplies every coefficient by `exp(-shift)`.
    pub fn scaled(&self, shift: f64) -> ExplicitPolynomial {
        let factor = (-shift).exp();
        let coeffs = self.coeffs.iter().map(|(s, &c)| (s.clone(), c * factor)).collect();
        ExplicitPolynomial { n: self.n, d: self.d, coeffs }
    }

    /// Removes element `e` from the ground set, shifting larger labels down.
    /// Terms containing `e` must already be gone.
    pub(crate) fn drop_element(&self, e: usize) -> ExplicitPolynomial {
        let coeffs = self
            .coeffs
            .iter()
            .map(|(s, &c)| {
                debug_assert!(!s.contains(e));
                (Subset::from_sorted(s.iter().map(|x| if x > e { x - 1 } else { x }).collect()), c)
            })
            .collect();
        ExplicitPolynomial { n: self.n - 1, d: self.d, coeffs }
    }

    /// `p(1, ..., 1)`.
    pub fn eval_at_one(&self) -> f64 {
        let mut sum = KahanSum::default();
        for &c in self.coeffs.values() {
            sum.add(c);
        }
        sum.total()
    }

    /// `∇p(1)`.
    pub fn gradient_at_one(&self) -> Vec<f64> {
        let mut g = vec![KahanSum::default(); self.n];
        for (s, &c) in &self.coeffs {
            for i in s.iter() {
                g[i].add(c);
            }
        }
        g.iter().map(KahanSum::total).collect()
    }

    /// `∇²p(1)`; the diagonal vanishes because `p` is multiaffine.
    pub fn hessian_at_one(&self) -> DMatrix<f64> {
        let mut h = vec![KahanSum::default(); self.n * self.n];
        for (s, &c) in &self.coeffs {
            let v = s.as_slice();
            for (a, &i) in v.iter().enumerate() {
                for &j in &v[a + 1..] {
                    h[i * self.n + j].add(c);
                    h[j * self.n + i].add(c);
                }
            }
        }
        DMatrix::from_fn(self.n, self.n, |i, j| h[i * self.n + j].total())
    }
}
