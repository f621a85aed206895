use matroid_walks::complex_spectra::{
    check_strong_log_concavity, check_zero_local_expander, eigenvalue_count_check, lower_walk, shared_spectrum_check, spectrum,
    upper_walk, WeightedComplex,
};
use matroid_walks::distributions::{ExplicitPolynomial, HomogeneousDistribution};
use matroid_walks::matroids::Matroid;
use matroid_walks::subset::{k_subsets, Subset};
use matroid_walks::suite;
use proptest::prelude::*;

fn complex(mu: &HomogeneousDistribution) -> (ExplicitPolynomial, WeightedComplex) {
    let p = mu.materialize(5000).unwrap();
    let x = WeightedComplex::from_polynomial(&p).unwrap();
    (p, x)
}

fn set(v: &[usize]) -> Subset {
    Subset::new(v.to_vec()).unwrap()
}

#[test]
fn suite_complexes_are_balanced() {
    for (name, _, x) in suite::complexes().unwrap() {
        let err = x.balance_error().unwrap();
        assert!(err <= 1e-12, "{name}: {err:e}");
    }
}

/// Euler's identity `Σ_i ∂_i p(1) = d·p(1)` and its derivative
/// `Σ_j ∂_i ∂_j p(1) = (d − 1)·∂_i p(1)`.
#[test]
fn derivatives_satisfy_euler_identities() {
    for (name, p, _) in suite::complexes().unwrap() {
        let d = p.d() as f64;
        let value = p.eval_at_one();
        let grad = p.gradient_at_one();
        assert!((grad.iter().sum::<f64>() - d * value).abs() <= 1e-9 * value, "{name}");
        let h = p.hessian_at_one();
        for i in 0..p.n() {
            let row: f64 = h.row(i).iter().sum();
            assert!((row - (d - 1.0) * grad[i]).abs() <= 1e-9 * value.max(1.0), "{name} row {i}");
        }
    }
}

#[test]
fn u24_walk_spectra() {
    let (_, x) = complex(&HomogeneousDistribution::uniform_bases(Matroid::uniform(4, 2).unwrap(), None).unwrap());
    let up = spectrum(&upper_walk(&x, 1).unwrap()).unwrap().eigenvalues;
    for (got, want) in up.iter().zip([1.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]) {
        assert!((got - want).abs() < 1e-12, "{up:?}");
    }
    let down = spectrum(&lower_walk(&x, 2).unwrap()).unwrap().eigenvalues;
    assert!((down[0] - 1.0).abs() < 1e-12);
    assert!((down[1] - 1.0 / 3.0).abs() < 1e-12, "{down:?}");
}

#[test]
fn k4_level_two_count_table() {
    let (_, x) = complex(&HomogeneousDistribution::uniform_bases(Matroid::complete_graph(4), None).unwrap());
    assert_eq!(x.level(2).len(), 15);
    assert_eq!(spectrum(&upper_walk(&x, 2).unwrap()).unwrap().eigenvalues.len(), 15);
    let r = eigenvalue_count_check(&x, 2).unwrap();
    assert!(r.pass, "{r:?}");
}

#[test]
fn single_basis_walks() {
    let (_, x) = complex(&HomogeneousDistribution::uniform_bases(Matroid::free(2), None).unwrap());
    let up = spectrum(&upper_walk(&x, 1).unwrap()).unwrap().eigenvalues;
    assert!((up[0] - 1.0).abs() < 1e-12 && up[1].abs() < 1e-12, "{up:?}");
}

#[test]
fn decomposable_quadratic_is_rejected() {
    let p = ExplicitPolynomial::new(4, 2, vec![(set(&[0, 1]), 1.0), (set(&[2, 3]), 1.0)]).unwrap();
    assert!(!check_strong_log_concavity(&p).unwrap().pass);
    let x = WeightedComplex::from_polynomial(&p).unwrap();
    assert!(!check_zero_local_expander(&x).unwrap().pass);
}

#[test]
fn uniform_bases_on_random_weights_are_log_concave() {
    for (i, (name, m)) in suite::matroids().into_iter().enumerate() {
        let lambda: Vec<f64> = (0..m.n()).map(|j| 0.3 + ((i * 7 + j * 13) % 11) as f64 / 4.0).collect();
        let mu = HomogeneousDistribution::uniform_bases(m, Some(lambda)).unwrap();
        let (p, _) = complex(&mu);
        assert!(check_strong_log_concavity(&p).unwrap().pass, "{name}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    /// Row-stochasticity, reversibility and the shared nonzero spectrum hold for
    /// any positively weighted pure complex, expander or not.
    #[test]
    fn walks_on_arbitrary_complexes(
        keep in proptest::collection::vec(any::<bool>(), 20),
        weights in proptest::collection::vec(0.1f64..5.0, 20),
    ) {
        let terms: Vec<(Subset, f64)> = k_subsets(6, 3)
            .zip(keep.iter().zip(&weights))
            .filter(|(_, (k, _))| **k)
            .map(|(s, (_, w))| (s, *w))
            .collect();
        prop_assume!(!terms.is_empty());
        let p = ExplicitPolynomial::new(6, 3, terms).unwrap();
        let x = WeightedComplex::from_polynomial(&p).unwrap();
        for k in 1..3 {
            let up = upper_walk(&x, k).unwrap();
            prop_assert!(up.row_sum_error() < 1e-12);
            prop_assert!(up.reversibility_error() < 1e-12);
            prop_assert!(shared_spectrum_check(&x, k).unwrap().pass);
        }
        let low = lower_walk(&x, 3).unwrap();
        prop_assert!(low.row_sum_error() < 1e-12);
    }
}
