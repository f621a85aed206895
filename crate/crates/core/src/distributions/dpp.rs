//! Positive semidefinite kernels and the principal-minor arithmetic behind
//! determinantal weights.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// A PSD kernel `L` together with the pivot threshold that decides whether a
/// principal minor counts as positive.
#[derive(Debug, Clone)]
pub struct DppKernel {
    l: DMatrix<f64>,
    tol: f64,
}

/// Lower Cholesky factor of a principal submatrix `L_T`, row-major.
#[derive(Debug, Clone)]
pub(crate) struct Factor {
    k: usize,
    r: Vec<f64>,
    pub(crate) log_det: f64,
}

impl Factor {
    /// Solves `R v = b` in place.
    fn forward_solve(&self, b: &mut [f64]) {
        for i in 0..self.k {
            let mut x = b[i];
            for j in 0..i {
                x -= self.r[i * self.k + j] * b[j];
            }
            b[i] = x / self.r[i * self.k + i];
        }
    }
}

impl DppKernel {
    /// Validates symmetry and positive semidefiniteness. The support threshold
    /// is `1e-10 · max(1, trace / n)`.
    pub fn new(l: DMatrix<f64>) -> Result<Self> {
        let n = l.nrows();
        if l.ncols() != n {
            return Err(Error::input_at("kernel", format!("kernel is {}x{}, expected square", n, l.ncols())));
        }
        if let Some((pos, v)) = l.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::input_at(format!("kernel[{}][{}]", pos % n, pos / n), format!("entry {v} is not finite")));
        }
        let scale = l.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for i in 0..n {
            for j in 0..i {
                if (l[(i, j)] - l[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::input_at(format!("kernel[{i}][{j}]"), "kernel is not symmetric"));
                }
            }
        }
        if n > 0 {
            let eig = SymmetricEigen::new(l.clone()).eigenvalues;
            let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
            let max = eig.iter().copied().fold(0.0f64, f64::max);
            if min < -1e-9 * max.max(1.0) {
                return Err(Error::input_at("kernel", format!("kernel is not positive semidefinite (eigenvalue {min:e})")));
            }
        }
        let tol = 1e-10 * (l.trace() / n.max(1) as f64).max(1.0);
        Ok(DppKernel { l, tol })
    }

    pub fn identity(n: usize) -> Self {
        DppKernel::new(DMatrix::identity(n, n)).expect("identity is PSD")
    }

    pub fn n(&self) -> usize {
        self.l.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.l
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    /// Cholesky factor of `L_T` in the given order, or `None` as soon as a
    /// pivot falls to the threshold.
    pub(crate) fn factor(&self, t: &[usize]) -> Option<Factor> {
        let k = t.len();
        let mut r = vec![0.0; k * k];
        let mut log_det = 0.0;
        for i in 0..k {
            for j in 0..=i {
                let mut x = self.l[(t[i], t[j])];
                for m in 0..j {
                    x -= r[i * k + m] * r[j * k + m];
                }
                if i == j {
                    if x <= self.tol {
                        return None;
                    }
                    log_det += x.ln();
                    r[i * k + i] = x.sqrt();
                } else {
                    r[i * k + j] = x / r[j * k + j];
                }
            }
        }
        Some(Factor { k, r, log_det })
    }

    /// `log det(L_S)`, or `-inf` when some pivot is at or below the threshold.
    pub fn log_det(&self, set: &[usize]) -> f64 {
        self.factor(set).map_or(f64::NEG_INFINITY, |f| f.log_det)
    }

    /// Schur value `L_jj − L_jT L_T^{-1} L_Tj`, so that
    /// `det(L_{T∪j}) = det(L_T) · s_j`.
    pub(crate) fn schur_value(&self, factor: &Factor, t: &[usize], j: usize, scratch: &mut Vec<f64>) -> f64 {
        scratch.clear();
        scratch.extend(t.iter().map(|&i| self.l[(i, j)]));
        factor.forward_solve(scratch);
        self.l[(j, j)] - scratch.iter().map(|v| v * v).sum::<f64>()
    }

    /// Conditions on `e` being present: returns `log L_ee` and the Schur
    /// complement kernel on the remaining elements, which keeps the
    /// threshold of `self`.
    pub fn condition(&self, e: usize) -> Result<(f64, DppKernel)> {
        let n = self.n();
        let pivot = self.l[(e, e)];
        if pivot <= self.tol {
            return Err(Error::State(format!("element {e} has zero diagonal and lies in no positive minor")));
        }
        let keep: Vec<usize> = (0..n).filter(|&i| i != e).collect();
        let l = DMatrix::from_fn(n - 1, n - 1, |a, b| {
            let (i, j) = (keep[a], keep[b]);
            self.l[(i, j)] - self.l[(i, e)] * self.l[(e, j)] / pivot
        });
        let l = (&l + l.transpose()) * 0.5;
        Ok((pivot.ln(), DppKernel { l, tol: self.tol }))
    }

    /// The kernel with row and column `e` removed.
    pub fn remove(&self, e: usize) -> DppKernel {
        let n = self.n();
        let keep: Vec<usize> = (0..n).filter(|&i| i != e).collect();
        let l = DMatrix::from_fn(n - 1, n - 1, |a, b| self.l[(keep[a], keep[b])]);
        DppKernel { l, tol: self.tol }
    }

    /// Hadamard's bound: `log det(L_S) ≤ Σ_{i∈S} log L_ii`, maximised over `|S| = k`.
    pub fn log_det_upper_bound(&self, k: usize) -> f64 {
        let mut diag: Vec<f64> = (0..self.n()).map(|i| self.l[(i, i)].max(0.0).ln()).collect();
        diag.sort_by(|a, b| b.total_cmp(a));
        diag.iter().take(k).sum()
    }
}
