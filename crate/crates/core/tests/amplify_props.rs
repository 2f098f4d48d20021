mod common;

use common::{all_assignments, random_pairing, rng};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::Rng;

use reconf_core::amplify::power::{for_each_walk, lambda_bound, powered_degree, DEFAULT_WALK_CAP};
use reconf_core::amplify::{
    completeness_sequence, decode_proof_sequence, expanderize, lift_assignment, popularity_vote, power,
    select_violated_edges, Proof, SqSymbol,
};
use reconf_core::gen::{planted_on, random_path};
use reconf_core::rational::{ceil, ratio, to_f64};
use reconf_core::spectral::{make_expander, random_regular_simple, second_eigenvalue, SimpleMultigraph};
use reconf_core::verifier::{
    edge_mask, exact_truncated_stats, faulty_steps, monte_carlo_stats, step_pair_bound, step_pair_conditional,
    test_walk, WalkSampler,
};
use reconf_core::{value, validate_sequence, Assignment, ConstraintGraph, Symbol};

/// Planted instance on a loop-free regular graph. Base self-loops carrying a relation
/// break completeness: a pair opinion on the loop's vertex tests the pair against itself.
fn planted_regular(seed: u64, n: usize, d: usize, w: usize) -> (ConstraintGraph, Vec<Assignment>) {
    let underlying = random_regular_simple(n, d, &mut rng(seed)).unwrap();
    planted_on(&mut rng(seed ^ 7), &underlying, w, 3, 0.25)
}

fn planted_multigraph(seed: u64, n: usize, d: usize, w: usize) -> (ConstraintGraph, Vec<Assignment>) {
    planted_on(&mut rng(seed ^ 7), &random_pairing(n, d, seed), w, 3, 0.25)
}

fn random_proof(g: &ConstraintGraph, radius: usize, seed: u64) -> Proof {
    let mut r = rng(seed);
    let w = g.alphabet().len() as u32;
    let opinions = (0..g.num_vertices())
        .map(|x| {
            g.ball(x, radius)
                .into_iter()
                .map(|v| {
                    let a = Symbol(r.gen_range(0..w));
                    let s = if w > 1 && r.gen_bool(0.3) {
                        SqSymbol::pair(a, Symbol((a.0 + r.gen_range(1..w)) % w))
                    } else {
                        SqSymbol::single(a)
                    };
                    (v, s)
                })
                .collect()
        })
        .collect();
    Proof::from_opinions(radius, opinions)
}

#[test]
fn expanderization_value_identity() {
    for seed in 0..20u64 {
        let n = [4usize, 5, 6][seed as usize % 3];
        let delta = if n == 5 { 2 } else { [2usize, 3][(seed / 3) as usize % 2] };
        let (g, _) = planted_regular(seed, n, delta, 2);
        let d0 = 4;
        let ex = expanderize(&g, d0, seed, 0.1).unwrap();
        assert_eq!(ex.graph.num_edges(), g.num_edges() + n * d0 / 2);
        let weight = ratio(delta, delta + d0);
        let rest = ratio(d0, delta + d0);
        for psi in all_assignments(n, 2) {
            let expected = &weight * value(&g, &psi).unwrap() + &rest;
            assert_eq!(value(&ex.graph, &psi).unwrap(), expected);
        }
    }
}

#[test]
fn powered_structure() {
    for r in [2usize, 3] {
        for radius in [2usize, 3] {
            for d in [3usize, 4] {
                let g = planted_regular(r as u64 * 100 + radius as u64 * 10 + d as u64, 6, d, 2).0;
                let p = power(&g, r, radius, DEFAULT_WALK_CAP).unwrap();
                let expected = powered_degree(r, radius, d) * 2u32;
                for v in 0..6 {
                    assert_eq!(p.weighted_incidence(v), expected);
                }
                let a = p.incidence_matrix();
                for i in 0..6 {
                    assert_eq!(a[i].iter().sum::<BigUint>(), expected);
                    for j in 0..6 {
                        assert_eq!(a[i][j], a[j][i]);
                    }
                }
                let lambda = second_eigenvalue(&SimpleMultigraph::from_constraint_graph(&g).unwrap()).unwrap();
                assert!(p.lambda_prime() <= lambda_bound(r, radius, d, lambda) + 1e-6);
            }
        }
    }
}

#[test]
fn walk_enumeration_counts() {
    let g = planted_multigraph(3, 6, 3, 2).0;
    let mut per_len = [0usize; 3];
    for_each_walk(&g, 3, |_, steps| per_len[steps.len() - 1] += 1);
    assert_eq!(per_len, [6 * 3, 6 * 9, 6 * 27]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn vote_inverts_lift(seed in any::<u64>(), w in 2usize..4, r in 2usize..4, radius in 1usize..3) {
        let (g, _) = planted_regular(seed, 6, 3, w);
        let psi = random_path(&mut rng(seed), 6, w, 1).remove(0);
        let proof = lift_assignment(&g, &psi, radius).unwrap();
        prop_assert_eq!(popularity_vote(&g, &proof, r, radius).unwrap(), psi);
    }

    #[test]
    fn completeness_sequences_pass_every_walk(seed in any::<u64>(), r in 2usize..4) {
        let radius = 2;
        let (g, path) = planted_regular(seed, 6, 3, 2);
        let p = power(&g, r, radius, DEFAULT_WALK_CAP).unwrap();
        let mut proofs = vec![lift_assignment(&g, &path[0], radius).unwrap()];
        for pair in path.windows(2) {
            let seq = completeness_sequence(&g, &pair[0], &pair[1], radius).unwrap();
            for step in seq.windows(2) {
                prop_assert!(step[0].differing_vertices(&step[1]).len() <= 1);
            }
            proofs.extend(seq.into_iter().skip(1));
        }
        for proof in &proofs {
            prop_assert_eq!(p.failing_walks(proof).count(), 0);
            prop_assert!(p.value(proof).is_one());
        }
        let decoded = decode_proof_sequence(&g, &proofs, r, radius).unwrap();
        prop_assert!(validate_sequence(&g, &decoded).is_ok());
        prop_assert_eq!(decoded.first(), &path[0]);
        prop_assert_eq!(decoded.last(), path.last().unwrap());
    }

    #[test]
    fn looped_completeness_is_sound_or_refused(seed in any::<u64>()) {
        let (g, path) = planted_multigraph(seed, 6, 3, 2);
        let p = power(&g, 2, 2, DEFAULT_WALK_CAP).unwrap();
        for pair in path.windows(2) {
            if let Ok(seq) = completeness_sequence(&g, &pair[0], &pair[1], 2) {
                for proof in &seq {
                    prop_assert!(p.value(proof).is_one());
                }
            }
        }
    }

    #[test]
    fn violated_selection_window(seed in any::<u64>(), r in 2usize..5, num in 1usize..20) {
        let (g, _) = planted_regular(seed, 8, 3, 3);
        let psi = random_path(&mut rng(seed ^ 3), 8, 3, 1).remove(0);
        let m = g.num_edges();
        let violated = m - g.satisfied_count(&psi);
        let delta = ratio(num, 20);
        let window = ratio(1, r) - ratio(1, m);
        let target = ceil(&(delta.clone().min(window.clone()) * ratio(m, 1)));
        match select_violated_edges(&g, &psi, r, &delta) {
            Ok(f) => {
                let frac = ratio(f.len(), m);
                prop_assert!(frac >= delta.clone().min(window));
                prop_assert!(frac <= ratio(1, r));
                prop_assert!(f.iter().all(|&e| !g.edge_satisfied(e, &psi)));
                prop_assert!(f.windows(2).all(|p| p[0] < p[1]));
            }
            Err(_) => prop_assert!(violated == 0 || BigInt::from(violated) < target),
        }
    }
}

/// Exact statistics recomputed walk by walk with explicit probabilities.
fn reference_stats(
    g: &ConstraintGraph,
    proof: &Proof,
    f: &[bool],
    r: usize,
    radius: usize,
) -> (BigRational, BigRational, BigRational) {
    let d = g.regular_degree().unwrap();
    let n = g.num_vertices();
    let (mut mean, mut second, mut pos) = (BigRational::zero(), BigRational::zero(), BigRational::zero());
    let keep = BigRational::one() - ratio(1, r);
    let p = power(g, r, radius, DEFAULT_WALK_CAP).unwrap();
    for k in 1..=radius {
        let prob = ratio(1, n) * num_traits::pow(ratio(1, d), k) * num_traits::pow(keep.clone(), k - 1) * ratio(1, r);
        for walk in p.walks(k) {
            let c = faulty_steps(g, proof, walk, Some(f));
            let cq = ratio(c, 1);
            mean += &prob * &cq;
            second += &prob * &cq * &cq;
            if c > 0 {
                pos += &prob;
            }
        }
    }
    (mean, second, pos)
}

#[test]
fn verifier_statistics_agree() {
    for seed in 0..6u64 {
        let (g, _) = planted_multigraph(seed, 6, 3, 2);
        let (r, radius) = (2 + seed as usize % 2, 2);
        let proof = random_proof(&g, radius, seed);
        let f = vec![true; g.num_edges()];
        let exact = exact_truncated_stats(&g, &proof, Some(&f), r, radius, DEFAULT_WALK_CAP).unwrap();
        let (mean, second, pos) = reference_stats(&g, &proof, &f, r, radius);
        assert_eq!((&exact.mean, &exact.second_moment, &exact.prob_positive), (&mean, &second, &pos));
        if !exact.second_moment.is_zero() {
            assert!(exact.prob_positive >= &exact.mean * &exact.mean / &exact.second_moment);
        }
        let mc = monte_carlo_stats(&g, &proof, Some(&f), r, radius, 40_000, seed, 1).unwrap();
        assert!(mc.mean.within(to_f64(&exact.mean), 4.0), "mean {:?} vs {}", mc.mean, to_f64(&exact.mean));
        assert!(mc.prob_positive.within(to_f64(&exact.prob_positive), 4.0));
        assert!(mc.prob_reject.within(to_f64(&exact.prob_reject), 4.0));
    }
}

#[test]
fn satisfying_proofs_never_fail() {
    let (g, path) = planted_regular(9, 6, 3, 3);
    let proof = lift_assignment(&g, &path[0], 3).unwrap();
    let p = power(&g, 2, 3, DEFAULT_WALK_CAP).unwrap();
    assert!(p.all_walks().all(|(w, _)| test_walk(&g, &proof, w)));
}

#[test]
fn walk_length_distributions() {
    let g = planted_regular(1, 6, 3, 2).0;
    for r in [2usize, 4] {
        let mut s = WalkSampler::seeded(&g, r, 5, 0).unwrap();
        let trials = 40_000;
        let (mut a, mut b) = (0usize, 0usize);
        for _ in 0..trials {
            let asrw = s.sample_asrw(0);
            assert!(!asrw.is_empty() && asrw.is_chained());
            a += asrw.len();
            b += s.sample_bsrw(0).len();
        }
        let (ma, mb) = (a as f64 / trials as f64, b as f64 / trials as f64);
        assert!((ma - r as f64).abs() < 0.1, "ASRW mean {ma}");
        assert!((mb - (r - 1) as f64).abs() < 0.1, "BSRW mean {mb}");
    }
}

/// `Pr[e_j ∈ F | e_i ∈ F]` by enumerating every length-`j` walk from a uniform start.
fn reference_conditional(g: &ConstraintGraph, f: &[bool], r: usize, i: usize, j: usize) -> BigRational {
    let (mut both, mut first) = (BigUint::zero(), BigUint::zero());
    for_each_walk(g, j, |_, steps| {
        if steps.len() == j && f[steps[i - 1].edge] {
            first += 1u32;
            if f[steps[j - 1].edge] {
                both += 1u32;
            }
        }
    });
    let survive = num_traits::pow(BigRational::one() - ratio(1, r), j - i);
    survive * BigRational::new(both.into(), first.into())
}

#[test]
fn expander_walk_conditional_bound() {
    for (seed, &(n, d)) in [(8usize, 3usize), (10, 3), (12, 4)].iter().enumerate() {
        let underlying = make_expander(n, d, 2.0 * ((d - 1) as f64).sqrt() * 1.3, seed as u64).unwrap();
        let g = reconf_core::gen::on_underlying(&underlying, 2, |_, _| reconf_core::Constraint::Any);
        let lambda = second_eigenvalue(&underlying).unwrap();
        let m = g.num_edges();
        let mut r = rng(seed as u64);
        for _ in 0..3 {
            let chosen: Vec<usize> = (0..m).filter(|_| r.gen_bool(0.3)).collect();
            if chosen.is_empty() {
                continue;
            }
            let f = edge_mask(&g, &chosen).unwrap();
            for rr in [2usize, 3] {
                let radius = 4;
                for i in 1..radius {
                    for j in i + 1..=radius {
                        let exact = step_pair_conditional(&g, &f, rr, i, j).unwrap();
                        assert_eq!(exact, reference_conditional(&g, &f, rr, i, j));
                        let bound = step_pair_bound(chosen.len() as f64 / m as f64, lambda / d as f64, rr, i, j);
                        assert!(to_f64(&exact) <= bound + 1e-12, "i={i} j={j}: {} > {bound}", to_f64(&exact));
                    }
                }
            }
        }
    }
}
