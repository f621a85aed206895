use serde::{Deserialize, Serialize};

/// Which way a telescoping level shrinks the ground set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Condition on the element being present; the degree drops by one.
    Contract,
    /// Condition on the element being absent; the degree stays.
    Delete,
}

/// Sample sizes and tolerances for one telescoping product.
///
/// Every level estimates all `n_j` marginals to within an additive
/// `additive_tolerance[j]` simultaneously (Hoeffding plus a union bound over
/// elements, with the chain's total-variation bias folded in). Since the
/// largest marginal in the chosen direction is at least `floor_j`, the
/// selected one then has relative error at most `per_level_eps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracySchedule {
    pub levels: usize,
    pub direction: Direction,
    pub per_level_eps: f64,
    pub per_level_delta: f64,
    pub samples_per_level: Vec<u64>,
    pub marginal_floor: Vec<f64>,
    pub additive_tolerance: Vec<f64>,
    /// ℓ1 distance to stationarity requested from the chain at each level.
    pub chain_tv: Vec<f64>,
}

/// Share of the additive tolerance given to sampling noise; the rest covers
/// the chain's bias.
const HOEFFDING_SHARE: f64 = 0.9;

impl AccuracySchedule {
    /// Levels needed before a degree-`d` layer on `n` elements has at most
    /// `n` members and is summed directly.
    pub fn plan(n: usize, d: usize, epsilon: f64, delta: f64) -> AccuracySchedule {
        let contract_levels = d.saturating_sub(1);
        let delete_levels = n.saturating_sub(d + 1);
        let (levels, direction) = if d <= 1 || d + 1 >= n {
            (0, Direction::Contract)
        } else if contract_levels <= delete_levels {
            (contract_levels, Direction::Contract)
        } else {
            (delete_levels, Direction::Delete)
        };
        if levels == 0 {
            return AccuracySchedule {
                levels,
                direction,
                per_level_eps: 0.0,
                per_level_delta: 0.0,
                samples_per_level: Vec::new(),
                marginal_floor: Vec::new(),
                additive_tolerance: Vec::new(),
                chain_tv: Vec::new(),
            };
        }
        // (1 − η)^{−L} = 1 + ε bounds the upper side; the lower side follows
        // from (1 + η)^{−L} ≥ 1 − Lη ≥ 1 − ln(1 + ε).
        let eta = 1.0 - (1.0 + epsilon).powf(-1.0 / levels as f64);
        let per_level_delta = delta / levels as f64;
        let mut samples = Vec::with_capacity(levels);
        let mut floors = Vec::with_capacity(levels);
        let mut tolerances = Vec::with_capacity(levels);
        let mut tvs = Vec::with_capacity(levels);
        for j in 0..levels {
            let nj = n - j;
            let dj = if direction == Direction::Contract { d - j } else { d };
            let floor = match direction {
                Direction::Contract => dj as f64 / nj as f64,
                Direction::Delete => (nj - dj) as f64 / nj as f64,
            };
            // |q̂ − q| ≤ t everywhere and q_max ≥ floor give q(e*) ≥ floor − 2t,
            // so t = η·floor/(1 + 2η) caps the relative error at η.
            let t = eta * floor / (1.0 + 2.0 * eta);
            let t_noise = HOEFFDING_SHARE * t;
            let m = ((2.0 * nj as f64 / per_level_delta).ln() / (2.0 * t_noise * t_noise)).ceil();
            samples.push(m as u64);
            floors.push(floor);
            tolerances.push(t);
            // ℓ1 distance ε_s moves every marginal by at most ε_s / 2.
            tvs.push(2.0 * (1.0 - HOEFFDING_SHARE) * t);
        }
        AccuracySchedule {
            levels,
            direction,
            per_level_eps: eta,
            per_level_delta,
            samples_per_level: samples,
            marginal_floor: floors,
            additive_tolerance: tolerances,
            chain_tv: tvs,
        }
    }

    pub fn total_samples(&self) -> u64 {
        self.samples_per_level.iter().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_layers_need_no_sampling() {
        for (n, d) in [(4, 0), (4, 1), (4, 3), (4, 4), (1, 1), (0, 0)] {
            assert_eq!(AccuracySchedule::plan(n, d, 0.1, 0.05).levels, 0, "n={n} d={d}");
        }
    }

    #[test]
    fn picks_the_shorter_direction() {
        let s = AccuracySchedule::plan(6, 2, 0.1, 0.05);
        assert_eq!((s.levels, s.direction), (1, Direction::Contract));
        let s = AccuracySchedule::plan(8, 6, 0.1, 0.05);
        assert_eq!((s.levels, s.direction), (1, Direction::Delete));
        let s = AccuracySchedule::plan(7, 3, 0.1, 0.05);
        assert_eq!((s.levels, s.direction), (2, Direction::Contract));
        assert!((s.marginal_floor[1] - 2.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn budgets_compose() {
        for (n, d, eps, delta) in [(6, 3, 0.1, 0.05), (12, 6, 0.2, 0.01), (9, 4, 0.5, 0.3)] {
            let s = AccuracySchedule::plan(n, d, eps, delta);
            assert!((1.0 + s.per_level_eps).powi(s.levels as i32) <= 1.0 + eps);
            assert!((1.0 - s.per_level_eps).powi(-(s.levels as i32)) <= 1.0 + eps + 1e-12);
            assert!(s.levels as f64 * s.per_level_delta <= delta * (1.0 + 1e-12));
            for j in 0..s.levels {
                let t = s.additive_tolerance[j];
                let worst = t / (s.marginal_floor[j] - 2.0 * t);
                assert!(worst <= s.per_level_eps * (1.0 + 1e-12));
                assert!(s.samples_per_level[j] > 0);
            }
        }
    }
}
