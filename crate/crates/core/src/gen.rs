//! Instance builders: fixed families and random instances with planted solutions.

use std::collections::BTreeSet;

use rand::Rng;

use crate::csp::{Alphabet, Assignment, Constraint, ConstraintGraph, Symbol};
use crate::spectral::SimpleMultigraph;

/// Cycle `C_n` with inequality constraints over `{0..w-1}`.
pub fn cycle_neq(n: usize, w: usize) -> ConstraintGraph {
    let edges = (0..n).map(|i| (i, (i + 1) % n, Constraint::not_equal(w)));
    ConstraintGraph::binary(n, Alphabet::numeric(w), edges).expect("valid cycle")
}

/// Complete graph `K_n` with inequality constraints over `{0..w-1}`.
pub fn complete_neq(n: usize, w: usize) -> ConstraintGraph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            edges.push((u, v, Constraint::not_equal(w)));
        }
    }
    ConstraintGraph::binary(n, Alphabet::numeric(w), edges).expect("valid complete graph")
}

/// Binary constraint graph on a given underlying multigraph, one edge per entry of
/// `SimpleMultigraph::edge_list`, with the given relation builder.
pub fn on_underlying(
    underlying: &SimpleMultigraph,
    w: usize,
    mut relation: impl FnMut(usize, usize) -> Constraint,
) -> ConstraintGraph {
    let edges = underlying.edge_list().into_iter().map(|(u, v)| (u, v, relation(u, v)));
    ConstraintGraph::binary(underlying.n(), Alphabet::numeric(w), edges).expect("valid underlying graph")
}

/// A random walk of single-vertex changes: `len` assignments, each step changing one
/// vertex to a different symbol.
pub fn random_path<R: Rng>(rng: &mut R, n: usize, w: usize, len: usize) -> Vec<Assignment> {
    let start = Assignment::new((0..n).map(|_| Symbol(rng.gen_range(0..w as u32))).collect());
    let mut path = vec![start];
    while path.len() < len.max(1) {
        let last = path.last().unwrap();
        if w < 2 || n == 0 {
            path.push(last.clone());
            continue;
        }
        let v = rng.gen_range(0..n);
        let shift = rng.gen_range(1..w as u32);
        let s = Symbol((last[v].0 + shift) % w as u32);
        path.push(last.with(v, s));
    }
    path
}

fn planted_relation<R: Rng>(
    rng: &mut R,
    w: usize,
    u: usize,
    v: usize,
    path: &[Assignment],
    density: f64,
) -> Constraint {
    let mut allowed = BTreeSet::new();
    for psi in path {
        allowed.insert(vec![psi[u], psi[v]]);
    }
    for a in 0..w as u32 {
        for b in 0..w as u32 {
            if rng.gen_bool(density) {
                allowed.insert(vec![Symbol(a), Symbol(b)]);
            }
        }
    }
    Constraint::Table(allowed)
}

/// Random relations on `underlying` that every assignment along a random single-change
/// path of length `path_len` satisfies. Returns the graph and the path.
pub fn planted_on<R: Rng>(
    rng: &mut R,
    underlying: &SimpleMultigraph,
    w: usize,
    path_len: usize,
    density: f64,
) -> (ConstraintGraph, Vec<Assignment>) {
    let path = random_path(rng, underlying.n(), w, path_len);
    let edges: Vec<_> = underlying
        .edge_list()
        .into_iter()
        .map(|(u, v)| (u, v, planted_relation(rng, w, u, v, &path, density)))
        .collect();
    let g = ConstraintGraph::binary(underlying.n(), Alphabet::numeric(w), edges).expect("valid planted graph");
    (g, path)
}

/// Loop-free random binary instance with `m` edges and a planted satisfying path.
pub fn planted_instance<R: Rng>(
    rng: &mut R,
    n: usize,
    m: usize,
    w: usize,
    path_len: usize,
    density: f64,
) -> (ConstraintGraph, Vec<Assignment>) {
    assert!(n >= 2, "need two vertices for loop-free edges");
    let mut underlying = SimpleMultigraph::empty(n);
    for _ in 0..m {
        let u = rng.gen_range(0..n);
        let v = (u + rng.gen_range(1..n)) % n;
        underlying.add_edge(u, v);
    }
    planted_on(rng, &underlying, w, path_len, density)
}
