//! Natural-log weights and the few numerically careful reductions over them.

use serde::{Deserialize, Serialize};

/// A nonnegative weight stored as its natural logarithm; zero is `-inf`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LogWeight(pub f64);

impl LogWeight {
    pub const ZERO: LogWeight = LogWeight(f64::NEG_INFINITY);
    pub const ONE: LogWeight = LogWeight(0.0);

    pub fn from_value(x: f64) -> Self {
        LogWeight(if x > 0.0 { x.ln() } else { f64::NEG_INFINITY })
    }

    pub fn value(self) -> f64 {
        self.0.exp()
    }

    pub fn is_zero(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }

    pub fn is_positive(self) -> bool {
        self.0 > f64::NEG_INFINITY
    }
}

/// `log(sum(exp(x)))`, returning `-inf` on an empty or all-zero input.
pub fn log_sum_exp(values: impl IntoIterator<Item = f64>) -> f64 {
    let values: Vec<f64> = values.into_iter().collect();
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let mut sum = KahanSum::default();
    for v in values {
        sum.add((v - max).exp());
    }
    max + sum.total().ln()
}

/// Compensated (Kahan–Babuška–Neumaier) summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Streaming log-sum-exp with compensated accumulation of the rescaled terms.
#[derive(Clone, Copy, Debug)]
pub struct LogAccumulator {
    max: f64,
    sum: KahanSum,
}

impl Default for LogAccumulator {
    fn default() -> Self {
        LogAccumulator { max: f64::NEG_INFINITY, sum: KahanSum::default() }
    }
}

impl LogAccumulator {
    pub fn add(&mut self, log_x: f64) {
        if log_x == f64::NEG_INFINITY {
            return;
        }
        if log_x > self.max {
            let scale = (self.max - log_x).exp();
            let mut rescaled = KahanSum::default();
            rescaled.add(self.sum.sum * scale);
            rescaled.add(self.sum.compensation * scale);
            rescaled.add(1.0);
            self.sum = rescaled;
            self.max = log_x;
        } else {
            self.sum.add((log_x - self.max).exp());
        }
    }

    pub fn log_total(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.sum.total().ln()
        }
    }
}

/// Index drawn with probability proportional to `exp(log_weights[i])`, given a
/// uniform variate `u` in `[0, 1)`. Entries equal to `-inf` are never chosen.
/// Returns `None` when every weight is zero.
pub fn choose_proportional(log_weights: &[f64], u: f64) -> Option<usize> {
    let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return None;
    }
    let total: f64 = log_weights.iter().map(|&w| (w - max).exp()).sum();
    let target = u * total;
    let mut acc = 0.0;
    let mut last = None;
    for (i, &w) in log_weights.iter().enumerate() {
        if w == f64::NEG_INFINITY {
            continue;
        }
        acc += (w - max).exp();
        last = Some(i);
        if target < acc {
            return Some(i);
        }
    }
    last
}
