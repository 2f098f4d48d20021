mod common;

use common::{brute_maximin, brute_min_cover, brute_minmax_cover, brute_opt, rng};
use num_traits::One;
use proptest::prelude::*;
use rand::Rng;

use reconf_core::covering::{validate_cover_sequence, Cover, SetSystem};
use reconf_core::gen::{planted_instance, random_path};
use reconf_core::oracle::{maximin_reconf_value, min_cover, minmax_cover_cost, opt_value, DEFAULT_COVER_CAP, DEFAULT_STATE_CAP};
use reconf_core::{sequence_value, validate_sequence, value, ConstraintGraph, Edge};

fn instance(seed: u64, n: usize, m: usize, w: usize, density: f64) -> (ConstraintGraph, Vec<reconf_core::Assignment>) {
    planted_instance(&mut rng(seed), n, m, w, 3, density)
}

fn random_system(seed: u64, universe: usize, sets: usize) -> SetSystem {
    let mut r = rng(seed);
    let labels: Vec<String> = (0..universe).map(|e| format!("u{e}")).collect();
    let mut family: Vec<(String, Vec<usize>)> = (0..sets)
        .map(|i| (format!("S{i}"), (0..universe).filter(|_| r.gen_bool(0.4)).collect()))
        .collect();
    // Make sure every element is coverable.
    for e in 0..universe {
        let i = r.gen_range(0..sets);
        if !family[i].1.contains(&e) {
            family[i].1.push(e);
        }
    }
    SetSystem::new(labels, family).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn maximin_matches_threshold_search(seed in any::<u64>(), n in 2usize..5, m in 1usize..6, w in 2usize..4, density in 0.0f64..0.6) {
        let (g, path) = instance(seed, n, m, w, density);
        let other = random_path(&mut rng(seed ^ 0x55), n, w, 1).remove(0);
        let ini = path[0].clone();
        let res = maximin_reconf_value(&g, &ini, &other, DEFAULT_STATE_CAP).unwrap();
        prop_assert_eq!(&res.value, &brute_maximin(&g, &ini, &other));
        prop_assert!(validate_sequence(&g, &res.witness).is_ok());
        prop_assert_eq!(res.witness.first(), &ini);
        prop_assert_eq!(res.witness.last(), &other);
        prop_assert_eq!(sequence_value(&g, &res.witness).unwrap(), res.value.clone());
        prop_assert!(res.value <= value(&g, &ini).unwrap().min(value(&g, &other).unwrap()));
    }

    #[test]
    fn maximin_is_symmetric(seed in any::<u64>(), n in 2usize..5, w in 2usize..4) {
        let (g, _) = instance(seed, n, 5, w, 0.3);
        let mut r = rng(seed.wrapping_add(1));
        let a = random_path(&mut r, n, w, 1).remove(0);
        let b = random_path(&mut r, n, w, 1).remove(0);
        let ab = maximin_reconf_value(&g, &a, &b, DEFAULT_STATE_CAP).unwrap().value;
        let ba = maximin_reconf_value(&g, &b, &a, DEFAULT_STATE_CAP).unwrap().value;
        prop_assert_eq!(ab, ba);
    }

    #[test]
    fn doubling_every_edge_changes_nothing(seed in any::<u64>(), n in 2usize..5, w in 2usize..4) {
        let (g, path) = instance(seed, n, 4, w, 0.3);
        let mut edges: Vec<Edge> = g.edges().to_vec();
        edges.extend(g.edges().iter().cloned());
        let doubled = ConstraintGraph::new(2, g.vertices().to_vec(), g.alphabet().clone(), edges).unwrap();
        let tar = random_path(&mut rng(!seed), n, w, 1).remove(0);
        prop_assert_eq!(
            maximin_reconf_value(&g, &path[0], &tar, DEFAULT_STATE_CAP).unwrap().value,
            maximin_reconf_value(&doubled, &path[0], &tar, DEFAULT_STATE_CAP).unwrap().value
        );
        prop_assert_eq!(opt_value(&g, DEFAULT_STATE_CAP).unwrap(), opt_value(&doubled, DEFAULT_STATE_CAP).unwrap());
    }

    #[test]
    fn planted_paths_reach_full_value(seed in any::<u64>(), n in 2usize..6, w in 2usize..4) {
        let (g, path) = instance(seed, n, 6, w, 0.1);
        let res = maximin_reconf_value(&g, &path[0], path.last().unwrap(), DEFAULT_STATE_CAP).unwrap();
        prop_assert!(res.value.is_one());
        prop_assert!(opt_value(&g, DEFAULT_STATE_CAP).unwrap().is_one());
    }

    #[test]
    fn opt_matches_exhaustive(seed in any::<u64>(), n in 2usize..5, m in 1usize..7, w in 2usize..4) {
        let (g, _) = instance(seed, n, m, w, 0.3);
        prop_assert_eq!(opt_value(&g, DEFAULT_STATE_CAP).unwrap(), brute_opt(&g));
    }

    #[test]
    fn min_cover_matches_exhaustive(seed in any::<u64>(), universe in 1usize..8, sets in 1usize..9) {
        let sys = random_system(seed, universe, sets);
        let mc = min_cover(&sys, DEFAULT_COVER_CAP).unwrap();
        prop_assert_eq!(mc.size, brute_min_cover(&sys));
        prop_assert!(sys.covers(&mc.cover));
        prop_assert_eq!(mc.cover.len(), mc.size);
    }

    #[test]
    fn minmax_cover_matches_exhaustive(seed in any::<u64>(), universe in 1usize..6, sets in 2usize..8) {
        let sys = random_system(seed, universe, sets);
        let full = Cover::new(0..sets);
        let mut r = rng(seed ^ 0xabc);
        // Two random covers obtained by pruning the full family.
        let prune = |r: &mut rand_chacha::ChaCha8Rng| {
            let mut c = full.clone();
            for i in 0..sets {
                let mut trial = c.clone();
                trial.0.remove(&i);
                if r.gen_bool(0.6) && sys.covers(&trial) {
                    c = trial;
                }
            }
            c
        };
        let ini = prune(&mut r);
        let tar = prune(&mut r);
        let res = minmax_cover_cost(&sys, &ini, &tar, DEFAULT_COVER_CAP).unwrap();
        let k = brute_minmax_cover(&sys, &ini, &tar);
        prop_assert_eq!(res.max_size, k);
        prop_assert_eq!(res.opt, brute_min_cover(&sys));
        prop_assert!(validate_cover_sequence(&sys, &res.witness).is_ok());
        prop_assert_eq!(res.witness.max_size(), k);
        prop_assert_eq!(res.witness.steps().first(), Some(&ini));
        prop_assert_eq!(res.witness.steps().last(), Some(&tar));
    }
}

#[test]
fn caps_are_enforced() {
    let (g, path) = instance(1, 14, 10, 3, 0.2);
    assert!(matches!(
        maximin_reconf_value(&g, &path[0], &path[0], 1000),
        Err(reconf_core::Error::Capacity(_))
    ));
}

#[test]
fn edgeless_value_is_undefined() {
    let g = ConstraintGraph::binary(2, reconf_core::Alphabet::numeric(2), []).unwrap();
    let a = reconf_core::Assignment::from_indices(&[0, 0]);
    assert!(matches!(maximin_reconf_value(&g, &a, &a, DEFAULT_STATE_CAP), Err(reconf_core::Error::ValueUndefined)));
}
