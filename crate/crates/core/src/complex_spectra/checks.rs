//! Pass/fail certificates over weighted complexes and their polynomials.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::walks::{local_walk, lower_walk, sorted_eigenvalues, spectrum, upper_walk};
use super::{WeightedComplex, EIGEN_TOL};
use crate::distributions::ExplicitPolynomial;
use crate::error::{Error, Result};
use crate::subset::Subset;

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub property: String,
    pub pass: bool,
    pub worst_face: Vec<usize>,
    pub worst_value: f64,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<serde_json::Value>,
}

impl CheckReport {
    pub(crate) fn new(property: &str, worst: Option<(Subset, f64)>, pass: bool, tolerance: f64) -> CheckReport {
        let (face, value) = worst.unwrap_or((Subset::empty(), f64::NEG_INFINITY));
        CheckReport { property: property.to_string(), pass, worst_face: face.into_vec(), worst_value: value, tolerance, detail: None }
    }

    pub(crate) fn with_detail(mut self, detail: serde_json::Value) -> CheckReport {
        self.detail = Some(detail);
        self
    }
}

/// Largest value with its face; earlier faces win ties so the result does
/// not depend on how work was split across threads.
fn worst_of(values: Vec<(Subset, f64)>) -> Option<(Subset, f64)> {
    let mut best: Option<(Subset, f64)> = None;
    for (face, v) in values {
        if best.as_ref().is_none_or(|(_, b)| v > *b) {
            best = Some((face, v));
        }
    }
    best
}

/// Checks `λ₂ ≤ tol` for the local walk of every face of size at most
/// `d − 2`. Complexes of dimension below two pass vacuously.
pub fn check_zero_local_expander(x: &WeightedComplex) -> Result<CheckReport> {
    let faces: Vec<Subset> = if x.d() >= 2 { x.faces_up_to(x.d() - 2).cloned().collect() } else { Vec::new() };
    let values = faces
        .into_par_iter()
        .map(|tau| {
            let l2 = spectrum(&local_walk(x, &tau)?)?.lambda2();
            Ok((tau, l2))
        })
        .collect::<Result<Vec<_>>>()?;
    let worst = worst_of(values);
    let pass = worst.as_ref().is_none_or(|(_, v)| *v <= EIGEN_TOL);
    Ok(CheckReport::new("zero_local_expander", worst, pass, EIGEN_TOL))
}

fn components(n: usize, terms: impl Iterator<Item = Vec<usize>>) -> (usize, Vec<bool>) {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut a: usize) -> usize {
        while parent[a] != a {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        a
    }
    let mut present = vec![false; n];
    for t in terms {
        for &i in &t {
            present[i] = true;
        }
        for w in t.windows(2) {
            let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
            parent[a] = b;
        }
    }
    let count = (0..n).filter(|&i| present[i] && find(&mut parent, i) == i).count();
    (count, present)
}

/// Certifies strong log-concavity at the all-ones point: the support graph
/// of every derivative `p_τ` with `|τ| ≤ d − 2` is connected, and every
/// quadratic derivative has at most one positive Hessian eigenvalue.
///
/// The reported value is the second eigenvalue of the degree-normalised
/// Hessian `D^{-1/2} ∇²p_τ(1) D^{-1/2}` (congruent to the Hessian, so the
/// inertia is the same), or `1` for a disconnected support graph.
pub fn check_strong_log_concavity(p: &ExplicitPolynomial) -> Result<CheckReport> {
    if p.is_zero() || p.d() < 2 {
        return Ok(CheckReport::new("strong_log_concavity", None, true, EIGEN_TOL));
    }
    let x = WeightedComplex::from_polynomial(p)?;
    let d = p.d();
    let faces: Vec<Subset> = x.faces_up_to(d - 2).cloned().collect();
    let values = faces
        .into_par_iter()
        .map(|tau| {
            let q = p.derivative_link(&tau);
            let (count, _) = components(p.n(), q.terms().map(|(s, _)| s.as_slice().to_vec()));
            if count > 1 {
                return Ok((tau, 1.0, "disconnected"));
            }
            if q.d() != 2 {
                return Ok((tau, f64::NEG_INFINITY, "connected"));
            }
            let grad = q.gradient_at_one();
            let hess = q.hessian_at_one();
            let vars: Vec<usize> = (0..p.n()).filter(|&i| grad[i] > 0.0).collect();
            let m = vars.len();
            if m > crate::dense_cap() {
                return Err(Error::Resource(format!("{m} variables exceed the dense cap")));
            }
            let scaled = DMatrix::from_fn(m, m, |a, b| {
                let (i, j) = (vars[a], vars[b]);
                hess[(i, j)] / (grad[i] * grad[j]).sqrt()
            });
            let eig = sorted_eigenvalues(scaled);
            Ok((tau, eig.get(1).copied().unwrap_or(f64::NEG_INFINITY), "quadratic"))
        })
        .collect::<Result<Vec<_>>>()?;
    let disconnected = values.iter().filter(|v| v.2 == "disconnected").count();
    let worst = worst_of(values.into_iter().map(|(t, v, _)| (t, v)).collect());
    let pass = disconnected == 0 && worst.as_ref().is_none_or(|(_, v)| *v <= EIGEN_TOL);
    Ok(CheckReport::new("strong_log_concavity", worst, pass, EIGEN_TOL)
        .with_detail(json!({ "disconnected_links": disconnected })))
}

#[derive(Debug, Clone, Serialize)]
pub struct CountRow {
    pub i: isize,
    pub threshold: f64,
    pub bound: usize,
    pub observed: usize,
}

/// For each `i = −1, ..., k`, the number of eigenvalues of the upper walk on
/// `X(k)` strictly above `1 − (i+1)/(k+1)` (plus tolerance) against `|X(i)|`.
pub fn eigenvalue_count_table(x: &WeightedComplex, k: usize) -> Result<(Vec<f64>, Vec<CountRow>)> {
    let eig = spectrum(&upper_walk(x, k)?)?.eigenvalues;
    let rows = (-1..=k as isize)
        .map(|i| {
            let threshold = 1.0 - (i + 1) as f64 / (k + 1) as f64;
            let observed = eig.iter().filter(|&&l| l > threshold + EIGEN_TOL).count();
            CountRow { i, threshold, bound: x.level_size(i), observed }
        })
        .collect();
    Ok((eig, rows))
}

/// The eigenvalue-count bound for the upper walk on `X(k)`. Requires the
/// complex to be a 0-local spectral expander.
pub fn eigenvalue_count_check(x: &WeightedComplex, k: usize) -> Result<CheckReport> {
    if k == 0 || k >= x.d() {
        return Err(Error::input_at("k", format!("need 1 <= k < {}, got {k}", x.d())));
    }
    let expander = check_zero_local_expander(x)?;
    if !expander.pass {
        return Err(Error::State(format!(
            "complex is not a 0-local spectral expander (λ₂ = {} at {:?})",
            expander.worst_value, expander.worst_face
        )));
    }
    let (_, rows) = eigenvalue_count_table(x, k)?;
    let excess = rows.iter().map(|r| r.observed as f64 - r.bound as f64).fold(f64::NEG_INFINITY, f64::max);
    let pass = rows.iter().all(|r| r.observed <= r.bound);
    let mut report = CheckReport::new("eigenvalue_count", None, pass, EIGEN_TOL);
    report.worst_value = excess;
    Ok(report.with_detail(json!({ "k": k, "rows": rows })))
}

/// `P_k^∧ ≼ (k/(k+1)) P_k^∨ + I/(k+1)` in the weighted inner product,
/// checked through the largest eigenvalue of the symmetrized difference.
pub fn loewner_domination_check(x: &WeightedComplex, k: usize) -> Result<CheckReport> {
    let up = upper_walk(x, k)?;
    let low = lower_walk(x, k)?;
    let (su, ru) = up.symmetrized();
    let (sl, rl) = low.symmetrized();
    if ru.max(rl) > 1e-9 {
        return Err(Error::Numeric(format!("symmetrization residual {:e} exceeds 1e-9", ru.max(rl))));
    }
    let m = up.len();
    let kk = k as f64;
    let diff = su - sl * (kk / (kk + 1.0)) - DMatrix::<f64>::identity(m, m) / (kk + 1.0);
    let top = sorted_eigenvalues(diff).first().copied().unwrap_or(f64::NEG_INFINITY);
    let mut report = CheckReport::new("loewner_domination", None, top <= EIGEN_TOL, EIGEN_TOL);
    report.worst_value = top;
    Ok(report.with_detail(json!({ "k": k })))
}

/// The nonzero spectra of `P_k^∧` and `P_{k+1}^∨` agree with multiplicity,
/// and both walks are positive semidefinite.
pub fn shared_spectrum_check(x: &WeightedComplex, k: usize) -> Result<CheckReport> {
    let up = spectrum(&upper_walk(x, k)?)?.eigenvalues;
    let low = spectrum(&lower_walk(x, k + 1)?)?.eigenvalues;
    let nonzero = |v: &[f64]| v.iter().copied().filter(|l| l.abs() > EIGEN_TOL).collect::<Vec<_>>();
    let (a, b) = (nonzero(&up), nonzero(&low));
    let gap = if a.len() == b.len() {
        a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    let min = up.iter().chain(&low).copied().fold(f64::INFINITY, f64::min);
    let pass = gap <= EIGEN_TOL && min >= -EIGEN_TOL;
    let mut report = CheckReport::new("shared_spectrum", None, pass, EIGEN_TOL);
    report.worst_value = gap;
    Ok(report.with_detail(json!({ "k": k, "nonzero_upper": a.len(), "nonzero_lower": b.len(), "min_eigenvalue": min })))
}

/// `λ₂` of the down-up chain on maximal faces is at most `1 − 1/d`, and the
/// chain is positive semidefinite.
pub fn spectral_gap_check(x: &WeightedComplex) -> Result<CheckReport> {
    if x.d() == 0 {
        return Ok(CheckReport::new("spectral_gap", None, true, EIGEN_TOL));
    }
    let eig = spectrum(&lower_walk(x, x.d())?)?.eigenvalues;
    let l2 = eig.get(1).copied().unwrap_or(f64::NEG_INFINITY);
    let min = eig.last().copied().unwrap_or(0.0);
    let bound = 1.0 - 1.0 / x.d() as f64;
    let pass = l2 <= bound + EIGEN_TOL && min >= -EIGEN_TOL;
    let mut report = CheckReport::new("spectral_gap", None, pass, EIGEN_TOL);
    report.worst_value = l2;
    Ok(report.with_detail(json!({ "bound": bound, "min_eigenvalue": min, "states": eig.len() })))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subset::k_subsets;

    fn s(v: &[usize]) -> Subset {
        Subset::new(v.to_vec()).unwrap()
    }

    fn u24() -> ExplicitPolynomial {
        ExplicitPolynomial::new(4, 2, k_subsets(4, 2).map(|b| (b, 1.0))).unwrap()
    }

    fn decomposable() -> ExplicitPolynomial {
        ExplicitPolynomial::new(4, 2, [(s(&[0, 1]), 1.0), (s(&[2, 3]), 1.0)]).unwrap()
    }

    #[test]
    fn expander_examples() {
        let x = WeightedComplex::from_polynomial(&u24()).unwrap();
        let r = check_zero_local_expander(&x).unwrap();
        assert!(r.pass);
        assert!((r.worst_value + 1.0 / 3.0).abs() < 1e-12);
        let r = check_zero_local_expander(&WeightedComplex::from_polynomial(&decomposable()).unwrap()).unwrap();
        assert!(!r.pass);
        assert!((r.worst_value - 1.0).abs() < 1e-12);
        assert_eq!(r.worst_face, Vec::<usize>::new());
    }

    #[test]
    fn log_concavity_examples() {
        assert!(check_strong_log_concavity(&u24()).unwrap().pass);
        assert!(check_strong_log_concavity(&u24().alpha_power(0.5).unwrap()).unwrap().pass);
        let r = check_strong_log_concavity(&decomposable()).unwrap();
        assert!(!r.pass);
        assert_eq!(r.detail.unwrap()["disconnected_links"], 1);
        // x0x1 + x0x2 + x1x2 + 3 x2x3 is connected; its Hessian has two
        // positive eigenvalues exactly when the weights are unbalanced enough.
        let bad = ExplicitPolynomial::new(4, 2, [(s(&[0, 1]), 10.0), (s(&[1, 2]), 0.1), (s(&[2, 3]), 10.0)]).unwrap();
        assert!(!check_strong_log_concavity(&bad).unwrap().pass);
    }

    #[test]
    fn count_and_domination_examples() {
        let x = WeightedComplex::from_polynomial(&u24()).unwrap();
        let r = eigenvalue_count_check(&x, 1).unwrap();
        assert!(r.pass);
        let rows = &r.detail.as_ref().unwrap()["rows"];
        assert_eq!(rows[0]["observed"], 0);
        assert_eq!(rows[1]["observed"], 1);
        assert!(loewner_domination_check(&x, 1).unwrap().pass);
        assert!(shared_spectrum_check(&x, 1).unwrap().pass);
        let gap = spectral_gap_check(&x).unwrap();
        assert!(gap.pass);
        assert!((gap.worst_value - 1.0 / 3.0).abs() < 1e-12);

        let single = ExplicitPolynomial::new(3, 3, [(s(&[0, 1, 2]), 1.0)]).unwrap();
        let x1 = WeightedComplex::from_polynomial(&single).unwrap();
        for k in 1..3 {
            let r = loewner_domination_check(&x1, k).unwrap();
            assert!(r.pass && r.worst_value.abs() < 1e-9);
        }

        let xd = WeightedComplex::from_polynomial(&decomposable()).unwrap();
        assert!(matches!(eigenvalue_count_check(&xd, 1), Err(Error::State(_))));
    }
}
