mod common;

use common::{power_iteration_lambda, random_pairing, rng};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

use reconf_core::spectral::{
    make_expander, mixing_discrepancy, product_lambda, random_regular, random_regular_simple, second_eigenvalue,
    superimpose, SimpleMultigraph,
};

fn regular_pair(seed: u64) -> (SimpleMultigraph, SimpleMultigraph) {
    let mut r = rng(seed);
    let n = 2 * r.gen_range(3usize..9);
    let d1 = r.gen_range(1usize..6);
    let d2 = r.gen_range(1usize..6);
    (random_pairing(n, d1, seed), random_pairing(n, d2, seed ^ 1))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn superimposition_is_subadditive(seed in any::<u64>()) {
        let (g, h) = regular_pair(seed);
        let lg = second_eigenvalue(&g).unwrap();
        let lh = second_eigenvalue(&h).unwrap();
        let sum = superimpose(&g, &h).unwrap();
        prop_assert_eq!(sum.regular_degree(), Some(g.regular_degree().unwrap() + h.regular_degree().unwrap()));
        prop_assert!(second_eigenvalue(&sum).unwrap() <= lg + lh + 1e-8);
    }

    #[test]
    fn product_is_submultiplicative(seed in any::<u64>()) {
        let (g, h) = regular_pair(seed);
        let lg = second_eigenvalue(&g).unwrap();
        let lh = second_eigenvalue(&h).unwrap();
        prop_assert!(product_lambda(&g, &h).unwrap() <= lg * lh + 1e-8);
    }

    #[test]
    fn eigensolver_matches_power_iteration(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = 2 * r.gen_range(3usize..8);
        let d = r.gen_range(2usize..n.min(7));
        let g = random_regular(n, d, &mut r).unwrap();
        let exact = second_eigenvalue(&g).unwrap();
        let iter = power_iteration_lambda(&g, seed);
        prop_assert!((exact - iter).abs() < 1e-6, "eigen {} vs power {}", exact, iter);
    }

    #[test]
    fn simple_generator_is_simple(seed in any::<u64>(), half in 3usize..15, d in 1usize..6) {
        let n = 2 * half;
        prop_assume!(d < n);
        let g = random_regular_simple(n, d, &mut rng(seed)).unwrap();
        prop_assert_eq!(g.regular_degree(), Some(d as u64));
        prop_assert!(!g.has_loops_or_multi_edges());
        for u in 0..n {
            for v in 0..n {
                prop_assert_eq!(g.entry(u, v), g.entry(v, u));
            }
        }
    }
}

#[test]
fn mixing_inequality_on_expanders() {
    for (i, &(n, d)) in [(12, 4), (20, 4), (16, 6), (30, 6)].iter().enumerate() {
        let target = 2.0 * ((d - 1) as f64).sqrt() * 1.25;
        let g = make_expander(n, d, target, i as u64).unwrap();
        let lambda = second_eigenvalue(&g).unwrap();
        assert!(lambda <= target + 1e-9);
        let mut r = rng(100 + i as u64);
        let vertices: Vec<usize> = (0..n).collect();
        for _ in 0..100 {
            let ks = r.gen_range(1..=n);
            let s: Vec<usize> = vertices.choose_multiple(&mut r, ks).copied().collect();
            let kt = r.gen_range(1..=n);
            let t: Vec<usize> = vertices.choose_multiple(&mut r, kt).copied().collect();
            let disc = mixing_discrepancy(&g, &s, &t).unwrap();
            assert!(disc <= lambda * ((s.len() * t.len()) as f64).sqrt() + 1e-9);
        }
    }
}

#[test]
fn expander_seeds_are_reproducible() {
    let a = make_expander(24, 4, 3.8, 11).unwrap();
    let b = make_expander(24, 4, 3.8, 11).unwrap();
    assert_eq!(a, b);
    assert!(make_expander(24, 4, 0.5, 11).is_err());
}
