mod common;

use common::*;
use dualrisk::comonotone::{c_comonotonic_check, c_comonotonicity_counterexample};
use dualrisk::evaluate::{concave_order_check, mps_generate, ConcaveOrderMethod};
use dualrisk::inequality::{gini_evaluate, Allocation};
use dualrisk::local_utility::{univariate_local_utility_closed_form, LocalUtility};
use dualrisk::*;
use rand::Rng;

/// Value of the given pairing and of the best one, both by enumeration.
fn pairing_oracle(x: &AlignedSample, y: &AlignedSample) -> (f64, f64) {
    let n = x.len();
    let value = |p: &[usize]| (0..n).map(|k| dot(x.row(k), y.row(p[k]))).sum::<f64>() / n as f64;
    let identity: Vec<usize> = (0..n).collect();
    let best = permutations(n)
        .iter()
        .map(|p| value(p))
        .fold(f64::NEG_INFINITY, f64::max);
    (value(&identity), best)
}

#[test]
fn frozen_c_comonotonicity_counterexample() {
    let [x, y, z] = c_comonotonicity_counterexample();
    for (a, b, expected) in [(&x, &y, true), (&y, &z, true), (&x, &z, false)] {
        let (given, best) = pairing_oracle(a, b);
        assert_eq!(given == best, expected);
        let check = c_comonotonic_check(a, b, 1e-9).unwrap();
        assert_eq!(check.c_comonotonic, expected);
        assert!((check.given - given).abs() < 1e-12);
        assert!((check.optimal - best).abs() < 1e-12);
    }
}

#[test]
fn random_search_finds_non_transitive_triples() {
    // the frozen fixture is not a fluke: such triples are common in the plane
    let mut g = rng(11);
    let mut found = 0;
    for _ in 0..3000 {
        let draw = |g: &mut rand_chacha::ChaCha8Rng| {
            let rows: Vec<[f64; 2]> = (0..3)
                .map(|_| [g.random_range(-3..=3) as f64, g.random_range(-3..=3) as f64])
                .collect();
            AlignedSample::from_rows(&rows).unwrap()
        };
        let (x, y, z) = (draw(&mut g), draw(&mut g), draw(&mut g));
        let ok = |a: &AlignedSample, b: &AlignedSample| {
            let (given, best) = pairing_oracle(a, b);
            given == best
        };
        if ok(&x, &y) && ok(&y, &z) && !ok(&x, &z) {
            found += 1;
        }
    }
    assert!(found > 0);
}

#[test]
fn product_reference_splits_the_gini_by_attribute() {
    let grid = DiscreteMeasure::uniform_grid(2, 2).unwrap();
    let ws = WeightScheme::risk_averse(grid, 1.0, &[0.0, 0.0]).unwrap();
    let mut g = rng(3);
    for _ in 0..50 {
        let a: Vec<f64> = (0..2).map(|_| g.random_range(0.0..10.0)).collect();
        let b: Vec<f64> = (0..2).map(|_| g.random_range(0.0..10.0)).collect();
        let rows: Vec<[f64; 2]> = a
            .iter()
            .flat_map(|&p| b.iter().map(move |&q| [p, q]))
            .collect();
        let alloc = Allocation::from_rows(&rows).unwrap();
        // per attribute: reference {1/4, 3/4}, sorted pairing
        let univariate = |v: &[f64]| {
            let s = sorted(v);
            -(0.25 * s[0] + 0.75 * s[1]) / 2.0
        };
        let expected = univariate(&a) + univariate(&b);
        assert!((gini_evaluate(&alloc, &ws).unwrap() - expected).abs() < 1e-12);
    }
}

#[test]
fn grid_local_utility_reproduces_the_integrated_cdf() {
    let mu = DiscreteMeasure::uniform_grid(1, 200).unwrap();
    let mut g = rng(5);
    for m in [1usize, 2, 4, 5, 8, 10, 20, 25, 40, 50] {
        let values: Vec<f64> = (0..m).map(|_| g.random_range(-5.0..5.0)).collect();
        let p = uni(&values);
        let lo = p.atom(0)[0];
        let lu = LocalUtility::from_distribution(&mu, &p)
            .unwrap()
            .anchored_at(&[lo])
            .unwrap();
        for atom in p.atoms() {
            let exact = univariate_local_utility_closed_form(&p, atom[0]).unwrap();
            assert!((lu.eval(atom).unwrap() - exact).abs() < 1e-6, "m = {m}");
        }
    }
}

#[test]
fn spreads_lower_the_local_utility() {
    let mu = DiscreteMeasure::uniform_grid(1, 200).unwrap();
    let mut g = rng(8);
    for seed in 0..10u64 {
        let base: Vec<f64> = (0..5).map(|_| g.random_range(0.0..4.0)).collect();
        let y = AlignedSample::from_values(&base).unwrap();
        let x = mps_generate(&y, g.random_range(0.1..1.5), seed).unwrap();
        let (p, q) = (x.empirical(), y.empirical());
        assert!(
            concave_order_check(&q, &p, ConcaveOrderMethod::DoublyStochastic)
                .unwrap()
                .holds
        );
        let up = LocalUtility::from_distribution(&mu, &p)
            .unwrap()
            .anchored_at(p.atom(0))
            .unwrap();
        let uq = LocalUtility::from_distribution(&mu, &q)
            .unwrap()
            .anchored_at(q.atom(0))
            .unwrap();
        for i in 0..100 {
            let z = -2.0 + 8.0 * i as f64 / 99.0;
            assert!(up.eval(&[z]).unwrap() <= uq.eval(&[z]).unwrap() + 1e-6);
        }
    }
}

#[test]
fn self_coupling_is_certified_by_half_the_squared_norm() {
    let mut g = rng(21);
    let p = random_measure(&mut g, 6, 2, -1.0, 1.0);
    let plan = max_correlation(&p, &p).unwrap();
    for (k, j) in plan.support() {
        assert_eq!(k, j);
    }
    // (|u|^2 / 2, |x|^2 / 2) is feasible, tight on the diagonal, and closes the gap
    let half: Vec<f64> = p.atoms().map(|u| 0.5 * dot(u, u)).collect();
    for k in 0..p.len() {
        for j in 0..p.len() {
            assert!(half[k] + half[j] >= dot(p.atom(k), p.atom(j)) - 1e-12);
        }
    }
    let dual: f64 = (0..p.len()).map(|k| 2.0 * p.weight(k) * half[k]).sum();
    assert!((dual - plan.value()).abs() < 1e-12);

    let lu = LocalUtility::from_distribution(&p, &p).unwrap();
    for k in 0..p.len() {
        let at = lu.eval(p.atom(k)).unwrap();
        assert!((at + (dot(p.atom(k), p.atom(k)) - lu.psi()[k])).abs() < 1e-12);
    }
}
