//! Spectral utilities for regular undirected multigraphs.
//!
//! Adjacency matrices store a self-loop as `2` on the diagonal, so every row sum is the
//! vertex degree and `A·1 = d·1` holds for regular graphs.

use nalgebra::{DMatrix, SymmetricEigen, SVD};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::csp::ConstraintGraph;
use crate::error::{Error, Result};

/// Undirected multigraph as a dense symmetric multiplicity matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimpleMultigraph {
    n: usize,
    adj: Vec<u64>,
}

impl SimpleMultigraph {
    pub fn empty(n: usize) -> Self {
        SimpleMultigraph { n, adj: vec![0; n * n] }
    }

    /// Builds from a full row-major matrix, which must be symmetric with even diagonal.
    pub fn from_adjacency(n: usize, adj: Vec<u64>) -> Result<Self> {
        if adj.len() != n * n {
            return Err(Error::validation(format!("adjacency has {} entries, expected {}", adj.len(), n * n)));
        }
        for i in 0..n {
            if adj[i * n + i] % 2 != 0 {
                return Err(Error::validation(format!("diagonal entry {i} is odd; loops count 2")));
            }
            for j in 0..i {
                if adj[i * n + j] != adj[j * n + i] {
                    return Err(Error::validation(format!("adjacency is not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(SimpleMultigraph { n, adj })
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = SimpleMultigraph::empty(n);
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::validation(format!("edge ({u}, {v}) out of range for {n} vertices")));
            }
            g.add_edge(u, v);
        }
        Ok(g)
    }

    /// Underlying multigraph of a binary constraint graph.
    pub fn from_constraint_graph(g: &ConstraintGraph) -> Result<Self> {
        g.require_binary("spectral analysis")?;
        let edges: Vec<_> = g.edges().iter().map(|e| (e.members[0], e.members[1])).collect();
        SimpleMultigraph::from_edges(g.num_vertices(), &edges)
    }

    pub fn complete(n: usize) -> Self {
        let mut g = SimpleMultigraph::empty(n);
        for u in 0..n {
            for v in u + 1..n {
                g.add_edge(u, v);
            }
        }
        g
    }

    pub fn cycle(n: usize) -> Self {
        let mut g = SimpleMultigraph::empty(n);
        for u in 0..n {
            g.add_edge(u, (u + 1) % n);
        }
        g
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        if u == v {
            self.adj[u * self.n + u] += 2;
        } else {
            self.adj[u * self.n + v] += 1;
            self.adj[v * self.n + u] += 1;
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entry(&self, u: usize, v: usize) -> u64 {
        self.adj[u * self.n + v]
    }

    pub fn row(&self, u: usize) -> &[u64] {
        &self.adj[u * self.n..(u + 1) * self.n]
    }

    pub fn degree(&self, u: usize) -> u64 {
        self.row(u).iter().sum()
    }

    pub fn regular_degree(&self) -> Option<u64> {
        let d = if self.n == 0 { 0 } else { self.degree(0) };
        (0..self.n).all(|u| self.degree(u) == d).then_some(d)
    }

    fn require_regular(&self) -> Result<u64> {
        self.regular_degree().ok_or_else(|| Error::NotRegular("vertex degrees differ".into()))
    }

    pub fn num_edges(&self) -> u64 {
        (0..self.n).map(|u| self.degree(u)).sum::<u64>() / 2
    }

    /// Every edge once, loops included, in row-major order.
    pub fn edge_list(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.n {
            for _ in 0..self.entry(u, u) / 2 {
                out.push((u, u));
            }
            for v in u + 1..self.n {
                for _ in 0..self.entry(u, v) {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub fn has_loops_or_multi_edges(&self) -> bool {
        (0..self.n).any(|u| self.entry(u, u) > 0 || self.row(u).iter().any(|&m| m > 1))
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.entry(i, j) as f64)
    }
}

fn centering(n: usize) -> DMatrix<f64> {
    let mut p = DMatrix::identity(n, n);
    p.add_scalar_mut(-1.0 / n as f64);
    p
}

/// Largest `|eigenvalue|` of a symmetric matrix restricted to the complement of `1`.
pub fn symmetric_lambda(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    if n <= 1 {
        return 0.0;
    }
    let p = centering(n);
    let projected = &p * m * &p;
    let sym = (&projected + projected.transpose()) * 0.5;
    SymmetricEigen::new(sym).eigenvalues.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
}

/// `max ||Mx|| / ||x||` over nonzero `x` orthogonal to `1`, for any square matrix.
pub fn operator_lambda(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    if n <= 1 {
        return 0.0;
    }
    let mp = m * centering(n);
    SVD::new(mp, false, false).singular_values.iter().fold(0.0f64, |acc, x| acc.max(*x))
}

/// Second largest absolute eigenvalue of a regular multigraph.
pub fn second_eigenvalue(g: &SimpleMultigraph) -> Result<f64> {
    g.require_regular()?;
    Ok(symmetric_lambda(&g.to_matrix()))
}

/// All adjacency eigenvalues, largest first.
pub fn spectrum(g: &SimpleMultigraph) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(g.to_matrix()).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

/// Edge-multiset union on a shared vertex set.
pub fn superimpose(g: &SimpleMultigraph, h: &SimpleMultigraph) -> Result<SimpleMultigraph> {
    if g.n != h.n {
        return Err(Error::validation(format!("vertex counts differ: {} vs {}", g.n, h.n)));
    }
    let adj = g.adj.iter().zip(&h.adj).map(|(a, b)| a + b).collect();
    Ok(SimpleMultigraph { n: g.n, adj })
}

/// Adjacency of the product graph: `A_G · A_H`.
pub fn product_matrix(g: &SimpleMultigraph, h: &SimpleMultigraph) -> Result<DMatrix<f64>> {
    if g.n != h.n {
        return Err(Error::validation(format!("vertex counts differ: {} vs {}", g.n, h.n)));
    }
    Ok(g.to_matrix() * h.to_matrix())
}

/// λ of the product graph `GH`.
pub fn product_lambda(g: &SimpleMultigraph, h: &SimpleMultigraph) -> Result<f64> {
    g.require_regular()?;
    h.require_regular()?;
    Ok(operator_lambda(&product_matrix(g, h)?))
}

const MAX_EXPANDER_ATTEMPTS: u64 = 64;

fn check_regular_params(n: usize, d: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::validation("graph needs at least one vertex"));
    }
    if (n * d) % 2 != 0 {
        return Err(Error::validation(format!("n·d must be even (n = {n}, d = {d})")));
    }
    Ok(())
}

/// Random simple `d`-regular graph on `n > d` vertices.
///
/// Points are paired one at a time, rejecting pairs that would create a loop or a
/// repeated edge; a stalled pairing restarts from scratch.
pub fn random_regular_simple<R: Rng>(n: usize, d: usize, rng: &mut R) -> Result<SimpleMultigraph> {
    check_regular_params(n, d)?;
    if d >= n {
        return Err(Error::validation(format!("a simple {d}-regular graph needs more than {d} vertices")));
    }
    'restart: loop {
        let mut g = SimpleMultigraph::empty(n);
        let mut points: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat(v).take(d)).collect();
        let mut failures = 0usize;
        while !points.is_empty() {
            let i = rng.gen_range(0..points.len());
            let j = rng.gen_range(0..points.len());
            let (u, v) = (points[i], points[j]);
            if i == j || u == v || g.entry(u, v) > 0 {
                failures += 1;
                if failures > 50 * points.len() + 100 {
                    continue 'restart;
                }
                continue;
            }
            g.add_edge(u, v);
            let (hi, lo) = if i > j { (i, j) } else { (j, i) };
            points.swap_remove(hi);
            points.swap_remove(lo);
            failures = 0;
        }
        return Ok(g);
    }
}

/// Random `d`-regular multigraph from a uniformly shuffled configuration (loops and
/// parallel edges kept).
pub fn random_regular_multigraph<R: Rng>(n: usize, d: usize, rng: &mut R) -> Result<SimpleMultigraph> {
    check_regular_params(n, d)?;
    let mut points: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat(v).take(d)).collect();
    points.shuffle(rng);
    let mut g = SimpleMultigraph::empty(n);
    for pair in points.chunks_exact(2) {
        g.add_edge(pair[0], pair[1]);
    }
    Ok(g)
}

/// Random `d`-regular graph: simple when `d < n`, a multigraph otherwise.
pub fn random_regular<R: Rng>(n: usize, d: usize, rng: &mut R) -> Result<SimpleMultigraph> {
    if d < n {
        random_regular_simple(n, d, rng)
    } else {
        random_regular_multigraph(n, d, rng)
    }
}

/// Slack allowed when comparing a computed λ against a target.
pub const LAMBDA_TOLERANCE: f64 = 1e-9;

/// A `d`-regular graph on `n` vertices whose measured λ is at most `lambda_target`.
///
/// `n = d + 1` yields the complete graph. Otherwise random graphs are drawn from
/// sub-seed streams `0, 1, 2, ...` of `seed` until one passes.
pub fn make_expander(n: usize, d: usize, lambda_target: f64, seed: u64) -> Result<SimpleMultigraph> {
    check_regular_params(n, d)?;
    if n == d + 1 {
        let g = SimpleMultigraph::complete(n);
        let lambda = second_eigenvalue(&g)?;
        return if lambda <= lambda_target + LAMBDA_TOLERANCE {
            Ok(g)
        } else {
            Err(Error::Construction(format!(
                "complete graph K_{n} has λ = {lambda:.9} > target {lambda_target:.9}"
            )))
        };
    }
    let mut best = f64::INFINITY;
    for attempt in 0..MAX_EXPANDER_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(attempt);
        let g = random_regular(n, d, &mut rng)?;
        let lambda = second_eigenvalue(&g)?;
        if lambda <= lambda_target + LAMBDA_TOLERANCE {
            return Ok(g);
        }
        best = best.min(lambda);
    }
    Err(Error::Construction(format!(
        "no {d}-regular graph on {n} vertices with λ ≤ {lambda_target:.9} after {MAX_EXPANDER_ATTEMPTS} attempts (best λ = {best:.9})"
    )))
}

/// Ordered-pair edge count `e(S, T) = Σ_{v∈S, w∈T} A[v][w]`.
pub fn edges_between(g: &SimpleMultigraph, s: &[usize], t: &[usize]) -> u64 {
    s.iter().map(|&v| t.iter().map(|&w| g.entry(v, w)).sum::<u64>()).sum()
}

fn as_vertex_set(g: &SimpleMultigraph, set: &[usize], name: &str) -> Result<Vec<usize>> {
    if let Some(&v) = set.iter().find(|&&v| v >= g.n) {
        return Err(Error::validation(format!("{name} contains unknown vertex {v}")));
    }
    let mut out = set.to_vec();
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// `|e(S, T) − d|S||T|/n|` for a regular graph.
pub fn mixing_discrepancy(g: &SimpleMultigraph, s: &[usize], t: &[usize]) -> Result<f64> {
    let d = g.require_regular()?;
    let s = as_vertex_set(g, s, "S")?;
    let t = as_vertex_set(g, t, "T")?;
    let e = edges_between(g, &s, &t) as f64;
    let expected = d as f64 * s.len() as f64 * t.len() as f64 / g.n as f64;
    Ok((e - expected).abs())
}
