use matroid_walks::counting::{
    cluster_partition, count_bases, count_independent_sets, dpp_partition, estimate_marginal, reliability, tutte_eval,
    EstimateConfig, Marginals,
};
use matroid_walks::distributions::{DppKernel, HomogeneousDistribution};
use matroid_walks::exact_oracle::{
    enumerate_bases, exact_cluster_log_partition, exact_dpp_partition, exact_marginals, exact_reliability, exact_tutte,
    kirchhoff_count,
};
use matroid_walks::matroids::Matroid;
use matroid_walks::sampler::SamplerConfig;
use matroid_walks::subset::Subset;
use matroid_walks::suite;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn exact() -> EstimateConfig {
    EstimateConfig { marginals: Marginals::Exact, ..EstimateConfig::new(0.1, 0.05, 0) }
}

fn assert_rel(got: f64, want: f64, tol: f64, what: &str) {
    assert!((got - want).abs() <= tol * want.abs(), "{what}: {got} vs {want}");
}

#[test]
fn marginal_estimates() {
    let u24 = HomogeneousDistribution::uniform_bases(Matroid::uniform(4, 2).unwrap(), None).unwrap();
    let q = estimate_marginal(&u24, 0, 100_000, &SamplerConfig::new(1, 0.01)).unwrap();
    assert!((q - 0.5).abs() < 0.01, "{q}");
    let single = HomogeneousDistribution::uniform_bases(Matroid::free(3), None).unwrap();
    assert_eq!(estimate_marginal(&single, 1, 50, &SamplerConfig::new(1, 0.01)).unwrap(), 1.0);
    let k4 = HomogeneousDistribution::uniform_bases(Matroid::complete_graph(4), None).unwrap();
    for e in 0..6 {
        let q = estimate_marginal(&k4, e, 40_000, &SamplerConfig::new(2 + e as u64, 0.01)).unwrap();
        assert!((q - 0.5).abs() < 0.01, "edge {e}: {q}");
    }
    assert!(estimate_marginal(&k4, 6, 10, &SamplerConfig::new(1, 0.01)).is_err());
}

/// `Σ_e Pr[e ∈ S] = d` forces a marginal of at least `d/n`, and likewise an
/// absence probability of at least `(n − d)/n`.
#[test]
fn marginal_floors_hold_on_the_suite() {
    for (name, mu) in suite::distributions() {
        let q = exact_marginals(&mu, 5000).unwrap();
        let (n, d) = (mu.n() as f64, mu.d() as f64);
        assert_rel(q.iter().sum(), d, 1e-9, &name);
        let max = q.iter().copied().fold(0.0, f64::max);
        let max_absent = q.iter().map(|x| 1.0 - x).fold(0.0, f64::max);
        assert!(max >= d / n - 1e-12, "{name}: {max} < {}", d / n);
        assert!(max_absent >= (n - d) / n - 1e-12, "{name}: {max_absent}");
    }
}

#[test]
fn telescoping_is_exact_on_the_suite() {
    for (name, m) in suite::matroids() {
        let truth = enumerate_bases(&m).unwrap().len() as f64;
        let r = count_bases(&m, &exact()).unwrap();
        assert_rel(r.estimate, truth, 1e-9, &name);
        assert_eq!(r.samples_used, 0);
    }
}

#[test]
fn independent_set_counts_are_exact_with_exact_marginals() {
    for (name, m) in suite::matroids() {
        let mut by_size = vec![0usize; m.rank() + 1];
        for mask in 0u64..1 << m.n() {
            let s = Subset::from_mask(mask);
            if m.independent(s.as_slice()) {
                by_size[s.len()] += 1;
            }
        }
        for (k, &want) in by_size.iter().enumerate() {
            let r = count_independent_sets(&m, k, &exact()).unwrap();
            assert_rel(r.estimate, want as f64, 1e-9, &format!("{name} k={k}"));
        }
    }
}

#[test]
fn cluster_recursion_matches_exhaustive_sums() {
    let mut cases = suite::matroids();
    cases.push(("with loops".into(), Matroid::linear(5, &[vec![1, 0, 2, 0, 3, 1], vec![0, 1, 4, 0, 1, 0]]).unwrap()));
    for (name, m) in cases {
        for (p, q) in [(1.0, 0.5), (0.2, 0.25), (3.0, 1.0), (0.0, 0.7)] {
            let want = exact_cluster_log_partition(&m, p, q).unwrap();
            let got = cluster_partition(&m, p, q, &exact()).unwrap().log_estimate;
            assert!((got - want).abs() < 1e-9, "{name} p={p} q={q}: {got} vs {want}");
        }
    }
}

#[test]
fn reliability_and_tutte_are_exact_with_exact_marginals() {
    for (name, m) in suite::matroids().into_iter().filter(|(_, m)| m.n() <= 9) {
        for p in [0.1, 0.5, 0.8] {
            assert_rel(reliability(&m, p, &exact()).unwrap().estimate, exact_reliability(&m, p).unwrap(), 1e-9, &name);
        }
        for (x, y) in [(2.0, 2.0), (1.5, 1.5), (3.0, 1.25)] {
            assert_rel(tutte_eval(&m, x, y, &exact()).unwrap().estimate, exact_tutte(&m, x, y).unwrap(), 1e-9, &name);
        }
    }
}

#[test]
fn dpp_partition_is_exact_with_exact_marginals() {
    for (name, kernel, k) in suite::dpp_kernels() {
        for alpha in suite::DPP_ALPHA {
            let want = exact_dpp_partition(&kernel, k, alpha).unwrap();
            assert_rel(dpp_partition(&kernel, k, alpha, &exact()).unwrap().estimate, want, 1e-8, &format!("{name} α={alpha}"));
        }
    }
}

/// For a diagonal kernel at `α = 1` the sum of principal minors is the
/// coefficient of `t^k` in `Π (1 + d_i t)`.
#[test]
fn diagonal_kernel_gives_elementary_symmetric_sums() {
    let diag = [0.5, 2.0, 1.5, 3.0, 0.25, 1.0];
    let mut coeffs = vec![1.0];
    for &d in &diag {
        let mut next = vec![0.0; coeffs.len() + 1];
        for (i, c) in coeffs.iter().enumerate() {
            next[i] += c;
            next[i + 1] += c * d;
        }
        coeffs = next;
    }
    let kernel = DppKernel::new(DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(&diag))).unwrap();
    for k in 1..=diag.len() {
        assert_rel(dpp_partition(&kernel, k, 1.0, &exact()).unwrap().estimate, coeffs[k], 1e-10, &format!("k={k}"));
    }
    let r = dpp_partition(&kernel, 3, 1.0, &EstimateConfig::new(0.1, 0.05, 4)).unwrap();
    assert_rel(r.estimate, coeffs[3], 0.1, "sampled");
}

#[test]
fn sampled_independent_set_counts() {
    let k4 = Matroid::complete_graph(4);
    for (k, want) in [(2, 15.0), (3, 16.0)] {
        let r = count_independent_sets(&k4, k, &EstimateConfig::new(0.1, 0.05, 40 + k as u64)).unwrap();
        assert_rel(r.estimate, want, 0.1, &format!("k={k}"));
    }
    let fano = count_bases(&Matroid::fano(), &EstimateConfig::new(0.1, 0.05, 3)).unwrap();
    assert_rel(fano.estimate, 28.0, 0.1, "Fano");
}

#[test]
fn reports_account_for_their_samples() {
    let r = reliability(&Matroid::complete_graph(4), 0.5, &EstimateConfig::new(0.1, 0.05, 8)).unwrap();
    let scheduled: u64 = r.breakdown.iter().map(|t| t.schedule.total_samples()).sum();
    assert_eq!(r.samples_used, scheduled);
    let sampled_terms = r.breakdown.iter().filter(|t| !t.exact).count();
    for t in &r.breakdown {
        assert_eq!(t.levels.len(), t.schedule.levels);
        if !t.exact {
            assert!((1.0 + t.schedule.per_level_eps).powi(t.schedule.levels as i32) <= 1.0 + t.epsilon);
            assert!(t.delta * sampled_terms as f64 <= r.delta * (1.0 + 1e-12));
        }
    }
    assert!((r.estimate - r.log_estimate.exp()).abs() <= 1e-12 * r.estimate);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    /// Exact-marginal telescoping against the matrix-tree theorem.
    #[test]
    fn spanning_tree_counts(mask in 1u32..(1 << 10)) {
        let all = Matroid::complete_graph(5);
        let (_, edges) = all.as_graph().unwrap();
        let chosen: Vec<(usize, usize)> = edges.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, e)| *e).collect();
        let m = Matroid::graphic(5, chosen.clone()).unwrap();
        let want = kirchhoff_count(5, &chosen);
        let r = count_bases(&m, &exact()).unwrap();
        // Disconnected graphs count spanning forests, which Kirchhoff's
        // determinant does not.
        if want > 0.0 {
            prop_assert!((r.estimate - want).abs() <= 1e-9 * want);
        } else {
            prop_assert!(r.estimate >= 1.0);
        }
    }
}
