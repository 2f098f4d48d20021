//! Slow, direct reference implementations used to cross-check the library.

#![allow(dead_code)]

use std::collections::{HashSet, VecDeque};

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use reconf_core::covering::{Cover, SetSystem};
use reconf_core::spectral::SimpleMultigraph;
use reconf_core::{Assignment, ConstraintGraph, Symbol};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn all_assignments(n: usize, w: usize) -> Vec<Assignment> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p: Vec<u32>| {
                (0..w as u32).map(move |s| {
                    let mut q = p.clone();
                    q.push(s);
                    q
                })
            })
            .collect();
    }
    out.into_iter().map(|v| Assignment::from_indices(&v)).collect()
}

fn satisfied(g: &ConstraintGraph, psi: &Assignment) -> usize {
    g.edges()
        .iter()
        .filter(|e| {
            let t: Vec<Symbol> = e.members.iter().map(|&m| psi[m]).collect();
            e.constraint.allows(&t)
        })
        .count()
}

pub fn brute_opt(g: &ConstraintGraph) -> BigRational {
    let m = g.num_edges();
    let best = all_assignments(g.num_vertices(), g.alphabet().len()).iter().map(|a| satisfied(g, a)).max().unwrap();
    BigRational::new(best.into(), m.into())
}

/// Largest threshold `t` such that `tar` is reachable from `ini` through assignments
/// satisfying at least `t` edges, found by a fresh breadth-first search per threshold.
pub fn brute_maximin(g: &ConstraintGraph, ini: &Assignment, tar: &Assignment) -> BigRational {
    let m = g.num_edges();
    let w = g.alphabet().len() as u32;
    let top = satisfied(g, ini).min(satisfied(g, tar));
    for t in (0..=top).rev() {
        let mut seen: HashSet<Assignment> = HashSet::from([ini.clone()]);
        let mut queue = VecDeque::from([ini.clone()]);
        let mut found = false;
        while let Some(cur) = queue.pop_front() {
            if cur == *tar {
                found = true;
                break;
            }
            for v in 0..cur.len() {
                for s in 0..w {
                    if cur[v].0 == s {
                        continue;
                    }
                    let next = cur.with(v, Symbol(s));
                    if satisfied(g, &next) >= t && seen.insert(next.clone()) {
                        queue.push_back(next);
                    }
                }
            }
        }
        if found {
            return BigRational::new(t.into(), m.into());
        }
    }
    unreachable!("threshold 0 always connects")
}

fn mask_covers(sys: &SetSystem, mask: u64) -> bool {
    let mut covered = vec![false; sys.universe_len()];
    for i in 0..sys.num_sets() {
        if mask >> i & 1 == 1 {
            for e in sys.elements_of(i) {
                covered[e] = true;
            }
        }
    }
    covered.into_iter().all(|c| c)
}

pub fn brute_min_cover(sys: &SetSystem) -> usize {
    (0u64..1 << sys.num_sets()).filter(|&m| mask_covers(sys, m)).map(|m| m.count_ones() as usize).min().unwrap()
}

/// Smallest `k` such that the covers of size at most `k` connect `ini` to `tar` under
/// single add/remove steps.
pub fn brute_minmax_cover(sys: &SetSystem, ini: &Cover, tar: &Cover) -> usize {
    let (a, b) = (ini.to_mask(), tar.to_mask());
    let m = sys.num_sets();
    for k in ini.len().max(tar.len())..=m {
        let mut seen = HashSet::from([a]);
        let mut queue = VecDeque::from([a]);
        while let Some(cur) = queue.pop_front() {
            if cur == b {
                return k;
            }
            for i in 0..m {
                let next = cur ^ (1 << i);
                if next.count_ones() as usize <= k && mask_covers(sys, next) && seen.insert(next) {
                    queue.push_back(next);
                }
            }
        }
    }
    unreachable!("the full family connects any two covers")
}

/// λ by power iteration of `A²` on the complement of the all-ones vector, finished with
/// a Rayleigh quotient.
pub fn power_iteration_lambda(g: &SimpleMultigraph, seed: u64) -> f64 {
    let n = g.n();
    let mut r = rng(seed);
    let mut x: Vec<f64> = (0..n).map(|_| r.gen_range(-1.0..1.0)).collect();
    let apply = |x: &[f64]| -> Vec<f64> {
        (0..n).map(|i| (0..n).map(|j| g.entry(i, j) as f64 * x[j]).sum()).collect()
    };
    let center = |x: &mut Vec<f64>| {
        let mean = x.iter().sum::<f64>() / n as f64;
        x.iter_mut().for_each(|v| *v -= mean);
    };
    let normalize = |x: &mut Vec<f64>| {
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        x.iter_mut().for_each(|v| *v /= norm);
    };
    center(&mut x);
    normalize(&mut x);
    for _ in 0..20_000 {
        let mut y = apply(&apply(&x));
        center(&mut y);
        if y.iter().all(|v| v.abs() < 1e-300) {
            return 0.0;
        }
        normalize(&mut y);
        x = y;
    }
    let ax = apply(&x);
    ax.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// A random `d`-regular multigraph from a random perfect matching of `n·d` points.
pub fn random_pairing(n: usize, d: usize, seed: u64) -> SimpleMultigraph {
    use rand::seq::SliceRandom;
    let mut r = rng(seed);
    let mut points: Vec<usize> = (0..n * d).map(|p| p / d).collect();
    points.shuffle(&mut r);
    let mut g = SimpleMultigraph::empty(n);
    for pair in points.chunks(2) {
        g.add_edge(pair[0], pair[1]);
    }
    g
}
