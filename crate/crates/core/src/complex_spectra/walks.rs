//! Dense walk matrices on the levels of a weighted complex.

use std::collections::HashMap;
use std::io::Write;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use super::WeightedComplex;
use crate::distributions::ExplicitPolynomial;
use crate::error::{Error, Result};
use crate::subset::Subset;

/// A row-stochastic matrix over a list of faces together with the weights
/// that make it reversible.
#[derive(Debug, Clone)]
pub struct WalkMatrix {
    pub faces: Vec<Subset>,
    pub matrix: DMatrix<f64>,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Spectrum {
    /// Sorted in descending order.
    pub eigenvalues: Vec<f64>,
    pub residual: f64,
}

impl Spectrum {
    /// Second largest eigenvalue, or `-inf` for a single state.
    pub fn lambda2(&self) -> f64 {
        self.eigenvalues.get(1).copied().unwrap_or(f64::NEG_INFINITY)
    }
}

fn check_cap(size: usize) -> Result<()> {
    let cap = crate::dense_cap();
    if size > cap {
        return Err(Error::Resource(format!("level of {size} faces exceeds the dense cap {cap}")));
    }
    Ok(())
}

impl WalkMatrix {
    pub fn len(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    /// `D^{1/2} P D^{-1/2}` with `D = diag(weights)`, and the largest
    /// entrywise asymmetry of that matrix.
    pub fn symmetrized(&self) -> (DMatrix<f64>, f64) {
        let root: Vec<f64> = self.weights.iter().map(|w| w.sqrt()).collect();
        let m = self.len();
        let s = DMatrix::from_fn(m, m, |i, j| root[i] * self.matrix[(i, j)] / root[j]);
        let mut residual: f64 = 0.0;
        for i in 0..m {
            for j in 0..i {
                residual = residual.max((s[(i, j)] - s[(j, i)]).abs());
            }
        }
        let sym = (&s + s.transpose()) * 0.5;
        (sym, residual)
    }

    /// Largest deviation of a row sum from one.
    pub fn row_sum_error(&self) -> f64 {
        self.matrix.row_iter().map(|r| (r.sum() - 1.0).abs()).fold(0.0, f64::max)
    }

    /// Largest relative violation of `w(a) P(a, b) = w(b) P(b, a)`.
    pub fn reversibility_error(&self) -> f64 {
        let m = self.len();
        let mut worst: f64 = 0.0;
        for i in 0..m {
            for j in 0..i {
                let a = self.weights[i] * self.matrix[(i, j)];
                let b = self.weights[j] * self.matrix[(j, i)];
                let scale = a.abs().max(b.abs());
                if scale > 0.0 {
                    worst = worst.max((a - b).abs() / scale);
                }
            }
        }
        worst
    }

    /// Writes `row_face,column_face,value` lines for the nonzero entries,
    /// with faces written as space-separated element lists.
    pub fn write_csv(&self, out: &mut impl Write) -> std::io::Result<()> {
        let label = |s: &Subset| s.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        writeln!(out, "row_face,column_face,value")?;
        for i in 0..self.len() {
            for j in 0..self.len() {
                let v = self.matrix[(i, j)];
                if v != 0.0 {
                    writeln!(out, "{},{},{v:e}", label(&self.faces[i]), label(&self.faces[j]))?;
                }
            }
        }
        Ok(())
    }
}

/// Eigenvalues of the symmetrized walk, descending. Fails when the walk is
/// not reversible with respect to its weights.
pub fn spectrum(w: &WalkMatrix) -> Result<Spectrum> {
    let (sym, residual) = w.symmetrized();
    if residual > 1e-9 {
        return Err(Error::Numeric(format!("symmetrization residual {residual:e} exceeds 1e-9")));
    }
    Ok(Spectrum { eigenvalues: sorted_eigenvalues(sym), residual })
}

pub(crate) fn sorted_eigenvalues(sym: DMatrix<f64>) -> Vec<f64> {
    if sym.nrows() == 0 {
        return Vec::new();
    }
    let mut eig: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    eig.sort_by(|a, b| b.total_cmp(a));
    eig
}

/// Upper walk on `X(k)`, `1 ≤ k < d`: stay with probability `1/(k+1)`,
/// otherwise move to `τ'` with `τ ∪ τ' ∈ X(k+1)` with probability
/// `w(τ ∪ τ') / ((k+1) w(τ))`.
pub fn upper_walk(x: &WeightedComplex, k: usize) -> Result<WalkMatrix> {
    if k == 0 || k >= x.d() {
        return Err(Error::input_at("k", format!("upper walk needs 1 <= k < {}, got {k}", x.d())));
    }
    let faces = x.level(k).to_vec();
    let weights = x.level_weights(k).to_vec();
    check_cap(faces.len())?;
    let m = faces.len();
    let kk = (k + 1) as f64;
    let mut p = DMatrix::from_diagonal_element(m, m, 1.0 / kk);
    for (sigma, &ws) in x.level(k + 1).iter().zip(x.level_weights(k + 1)) {
        let idx: Vec<usize> = sigma.iter().map(|i| x.face_index(&sigma.without(i)).expect("closed complex")).collect();
        for &a in &idx {
            for &b in &idx {
                if a != b {
                    p[(a, b)] = ws / (kk * weights[a]);
                }
            }
        }
    }
    Ok(WalkMatrix { faces, matrix: p, weights })
}

/// Lower walk on `X(k)`, `1 ≤ k ≤ d`: drop a uniform element, then add one
/// back in proportion to the weight of the result. At `k = d` this is the
/// down-up chain on maximal faces.
pub fn lower_walk(x: &WeightedComplex, k: usize) -> Result<WalkMatrix> {
    if k == 0 || k > x.d() {
        return Err(Error::input_at("k", format!("lower walk needs 1 <= k <= {}, got {k}", x.d())));
    }
    let faces = x.level(k).to_vec();
    let weights = x.level_weights(k).to_vec();
    check_cap(faces.len())?;
    let m = faces.len();
    let kk = k as f64;
    let mut cofaces: HashMap<usize, Vec<usize>> = HashMap::new();
    for (a, sigma) in faces.iter().enumerate() {
        for i in sigma.iter() {
            let t = x.face_index(&sigma.without(i)).expect("closed complex");
            cofaces.entry(t).or_default().push(a);
        }
    }
    let lower = x.level_weights(k - 1);
    let mut p = DMatrix::zeros(m, m);
    let mut order: Vec<(&usize, &Vec<usize>)> = cofaces.iter().collect();
    order.sort_by_key(|(t, _)| **t);
    for (&t, up) in order {
        for &a in up {
            for &b in up {
                p[(a, b)] += weights[b] / (kk * lower[t]);
            }
        }
    }
    Ok(WalkMatrix { faces, matrix: p, weights })
}

/// Non-lazy walk on the vertices of the link of `τ`:
/// `P(i, j) = w(τ ∪ {i, j}) / w(τ ∪ {i})` for `i ≠ j`, zero diagonal.
pub fn local_walk(x: &WeightedComplex, tau: &Subset) -> Result<WalkMatrix> {
    if !x.contains(tau) {
        return Err(Error::input(format!("{tau:?} is not a face")));
    }
    if x.d() < tau.len() + 2 {
        return Err(Error::input(format!("link of {tau:?} has dimension {} < 2", x.d() - tau.len())));
    }
    let k = tau.len();
    let mut faces = Vec::new();
    let mut weights = Vec::new();
    for (v, &w) in x.level(k + 1).iter().zip(x.level_weights(k + 1)) {
        if tau.is_subset_of(v) {
            faces.push(v.difference(tau));
            weights.push(w);
        }
    }
    check_cap(faces.len())?;
    let m = faces.len();
    let pos: HashMap<usize, usize> = faces.iter().enumerate().map(|(a, f)| (f.as_slice()[0], a)).collect();
    let mut p = DMatrix::zeros(m, m);
    for (e, &w) in x.level(k + 2).iter().zip(x.level_weights(k + 2)) {
        if !tau.is_subset_of(e) {
            continue;
        }
        let pair = e.difference(tau);
        let (i, j) = (pos[&pair.as_slice()[0]], pos[&pair.as_slice()[1]]);
        p[(i, j)] = w / weights[i];
        p[(j, i)] = w / weights[j];
    }
    Ok(WalkMatrix { faces, matrix: p, weights })
}

/// `(1/(d−k−1)) · diag(∇p_τ(1))^{-1} · ∇²p_τ(1)` restricted to variables
/// with a positive first derivative, where `k = |τ|`.
pub fn normalized_hessian(p: &ExplicitPolynomial, tau: &Subset) -> Result<WalkMatrix> {
    if p.d() < tau.len() + 2 {
        return Err(Error::input(format!("derivative along {tau:?} has degree {} < 2", p.d().saturating_sub(tau.len()))));
    }
    let q = p.derivative_link(tau);
    if q.is_zero() {
        return Err(Error::State(format!("derivative along {tau:?} vanishes")));
    }
    let grad = q.gradient_at_one();
    let hess = q.hessian_at_one();
    let vars: Vec<usize> = (0..p.n()).filter(|&i| grad[i] > 0.0).collect();
    check_cap(vars.len())?;
    let scale = (q.d() - 1) as f64;
    let matrix = DMatrix::from_fn(vars.len(), vars.len(), |a, b| hess[(vars[a], vars[b])] / (scale * grad[vars[a]]));
    Ok(WalkMatrix {
        faces: vars.iter().map(|&i| Subset::singleton(i)).collect(),
        matrix,
        weights: vars.iter().map(|&i| grad[i]).collect(),
    })
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

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn upper_walk_examples() {
        let x = WeightedComplex::from_polynomial(&u24()).unwrap();
        let w = upper_walk(&x, 1).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 0.5 } else { 1.0 / 6.0 };
                assert!((w.matrix[(i, j)] - expect).abs() < 1e-15);
            }
        }
        let sp = spectrum(&w).unwrap();
        assert!(close(&sp.eigenvalues, &[1.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 1e-12));

        let single = ExplicitPolynomial::new(2, 2, [(s(&[0, 1]), 1.0)]).unwrap();
        let x1 = WeightedComplex::from_polynomial(&single).unwrap();
        let w = upper_walk(&x1, 1).unwrap();
        assert!(w.matrix.iter().all(|&v| v == 0.5));
        assert!(upper_walk(&x, 2).is_err());
        assert!(upper_walk(&x, 0).is_err());
    }

    #[test]
    fn lower_walk_examples() {
        let x = WeightedComplex::from_polynomial(&u24()).unwrap();
        let w = lower_walk(&x, 2).unwrap();
        let from = w.faces.iter().position(|f| *f == s(&[0, 1])).unwrap();
        for (b, f) in w.faces.iter().enumerate() {
            let v = w.matrix[(from, b)];
            let expect = match f.intersection(&s(&[0, 1])).len() {
                2 => 1.0 / 3.0,
                1 => 1.0 / 6.0,
                _ => 0.0,
            };
            assert!((v - expect).abs() < 1e-15, "{f:?}");
        }
        let sp = spectrum(&w).unwrap();
        assert!(close(&sp.eigenvalues, &[1.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.0, 0.0], 1e-12));
        assert!(w.row_sum_error() < 1e-12);
        assert!(w.reversibility_error() < 1e-10);
        assert!(lower_walk(&x, 3).is_err());
    }

    #[test]
    fn local_walk_examples() {
        let x = WeightedComplex::from_polynomial(&u24()).unwrap();
        let w = local_walk(&x, &Subset::empty()).unwrap();
        for i in 0..4 {
            assert_eq!(w.matrix[(i, i)], 0.0);
            assert!((w.matrix.row(i).sum() - 1.0).abs() < 1e-15);
        }
        let sp = spectrum(&w).unwrap();
        assert!(close(&sp.eigenvalues, &[1.0, -1.0 / 3.0, -1.0 / 3.0, -1.0 / 3.0], 1e-12));
        assert!(local_walk(&x, &s(&[0])).is_err());
    }

    #[test]
    fn local_walk_is_doubled_upper_walk_of_link() {
        let p = ExplicitPolynomial::new(
            5,
            3,
            [(s(&[0, 1, 2]), 1.0), (s(&[0, 1, 3]), 2.0), (s(&[0, 2, 4]), 0.5), (s(&[1, 3, 4]), 3.0), (s(&[0, 3, 4]), 1.5)],
        )
        .unwrap();
        let x = WeightedComplex::from_polynomial(&p).unwrap();
        for tau in x.faces_up_to(1).cloned().collect::<Vec<_>>() {
            let local = local_walk(&x, &tau).unwrap();
            let link = x.link(&tau).unwrap();
            let up = upper_walk(&link, 1).unwrap();
            let doubled = (up.matrix * 2.0) - DMatrix::identity(up.faces.len(), up.faces.len());
            assert_eq!(local.faces, up.faces);
            assert!((local.matrix - doubled).abs().max() < 1e-15);
        }
    }

    #[test]
    fn normalized_hessian_examples() {
        let h = normalized_hessian(&u24(), &Subset::empty()).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 0.0 } else { 1.0 / 3.0 };
                assert!((h.matrix[(i, j)] - expect).abs() < 1e-15);
            }
        }
        assert!(normalized_hessian(&u24(), &s(&[0])).is_err());
        let x = ExplicitPolynomial::new(4, 3, [(s(&[0, 1, 2]), 1.0)]).unwrap();
        assert!(matches!(normalized_hessian(&x, &s(&[3])), Err(Error::State(_))));
    }

    #[test]
    fn disconnected_local_walk_has_second_eigenvalue_one() {
        let p = ExplicitPolynomial::new(4, 2, [(s(&[0, 1]), 1.0), (s(&[2, 3]), 1.0)]).unwrap();
        let x = WeightedComplex::from_polynomial(&p).unwrap();
        let sp = spectrum(&local_walk(&x, &Subset::empty()).unwrap()).unwrap();
        assert!((sp.lambda2() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn spectrum_rejects_irreversible_weights() {
        let mut w = upper_walk(&WeightedComplex::from_polynomial(&u24()).unwrap(), 1).unwrap();
        w.weights[0] = 10.0;
        assert!(matches!(spectrum(&w), Err(Error::Numeric(_))));
    }

    #[test]
    fn csv_lists_nonzero_entries() {
        let x = WeightedComplex::from_polynomial(&u24()).unwrap();
        let mut buf = Vec::new();
        local_walk(&x, &Subset::empty()).unwrap().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 13);
        assert!(text.lines().nth(1).unwrap().starts_with("0,1,"));
    }
}
