//! Walk enumeration and the powered constraint graph.

use nalgebra::DMatrix;
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use super::proof::Proof;
use crate::csp::{ConstraintGraph, Step};
use crate::error::{Error, Result};
use crate::rational::from_biguint;
use crate::spectral::symmetric_lambda;
use crate::verifier::test_walk;

/// Default bound on the number of enumerated walks.
pub const DEFAULT_WALK_CAP: u64 = 2_000_000;

/// A directed walk: a start vertex and a chain of steps.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Walk {
    pub start: usize,
    pub steps: Vec<Step>,
}

impl Walk {
    pub fn empty(start: usize) -> Self {
        Walk { start, steps: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn end(&self) -> usize {
        self.steps.last().map_or(self.start, |s| s.to)
    }

    pub fn is_chained(&self) -> bool {
        let mut at = self.start;
        for s in &self.steps {
            if s.from != at {
                return false;
            }
            at = s.to;
        }
        true
    }

    pub fn reversed(&self) -> Walk {
        Walk {
            start: self.end(),
            steps: self
                .steps
                .iter()
                .rev()
                .map(|s| Step { edge: s.edge, from: s.to, to: s.from, forward: !s.forward })
                .collect(),
        }
    }
}

/// Number of walks of length `1..=max_len` from all starts of a `d`-regular graph.
pub fn walk_count(n: usize, d: usize, max_len: usize) -> Option<u64> {
    let mut total: u64 = 0;
    let mut per_start: u64 = 1;
    for _ in 0..max_len {
        per_start = per_start.checked_mul(d as u64)?;
        total = total.checked_add(per_start.checked_mul(n as u64)?)?;
    }
    Some(total)
}

pub(crate) fn check_walk_cap(g: &ConstraintGraph, d: usize, max_len: usize, cap: u64) -> Result<()> {
    match walk_count(g.num_vertices(), d, max_len) {
        Some(c) if c <= cap => Ok(()),
        _ => Err(Error::capacity(format!(
            "enumerating walks of length ≤ {max_len} on a {d}-regular graph with {} vertices exceeds the cap {cap}",
            g.num_vertices()
        ))),
    }
}

/// Calls `f(start, steps)` for every directed walk of length `1..=max_len`, in
/// depth-first order (starts ascending, steps in half-edge order).
pub fn for_each_walk(g: &ConstraintGraph, max_len: usize, mut f: impl FnMut(usize, &[Step])) {
    fn extend(g: &ConstraintGraph, at: usize, start: usize, max_len: usize, stack: &mut Vec<Step>, f: &mut dyn FnMut(usize, &[Step])) {
        for &s in g.steps_from(at) {
            stack.push(s);
            f(start, stack);
            if stack.len() < max_len {
                extend(g, s.to, start, max_len, stack, f);
            }
            stack.pop();
        }
    }
    let mut stack = Vec::with_capacity(max_len);
    for start in 0..g.num_vertices() {
        extend(g, start, start, max_len, &mut stack, &mut f);
    }
}

/// `(r-1)^(k-1) r^(R-k) d^(R-k)` for `k = 1..=R`.
pub fn multiplicities(r: usize, radius: usize, d: usize) -> Vec<BigUint> {
    (1..=radius)
        .map(|k| {
            BigUint::from(r - 1).pow((k - 1) as u32)
                * BigUint::from(r).pow((radius - k) as u32)
                * BigUint::from(d).pow((radius - k) as u32)
        })
        .collect()
}

/// `(r^R − (r−1)^R) · d^R`.
pub fn powered_degree(r: usize, radius: usize, d: usize) -> BigUint {
    (BigUint::from(r).pow(radius as u32) - BigUint::from(r - 1).pow(radius as u32)) * BigUint::from(d).pow(radius as u32)
}

/// `Σ_k c_k λ^k`, the λ bound for the powered graph.
pub fn lambda_bound(r: usize, radius: usize, d: usize, lambda: f64) -> f64 {
    multiplicities(r, radius, d)
        .iter()
        .enumerate()
        .map(|(i, c)| c.to_f64().unwrap_or(f64::INFINITY) * lambda.powi(i as i32 + 1))
        .sum()
}

/// Every directed walk of length `1..=R` as an edge, each with its length's multiplicity.
/// Edge constraints are the walk tests, evaluated on demand.
#[derive(Clone, Debug)]
pub struct PoweredGraph {
    base: ConstraintGraph,
    r: usize,
    radius: usize,
    d: usize,
    /// `walks_by_len[k-1]` holds the walks of length `k`.
    walks_by_len: Vec<Vec<Walk>>,
    multiplicity: Vec<BigUint>,
}

pub fn power(g: &ConstraintGraph, r: usize, radius: usize, cap: u64) -> Result<PoweredGraph> {
    g.require_binary("powering")?;
    if r < 2 {
        return Err(Error::validation("r must be at least 2"));
    }
    if radius == 0 {
        return Err(Error::validation("R must be at least 1"));
    }
    let d = g.require_regular()?;
    check_walk_cap(g, d, radius, cap)?;
    let mut walks_by_len = vec![Vec::new(); radius];
    for_each_walk(g, radius, |start, steps| {
        walks_by_len[steps.len() - 1].push(Walk { start, steps: steps.to_vec() });
    });
    Ok(PoweredGraph { base: g.clone(), r, radius, d, walks_by_len, multiplicity: multiplicities(r, radius, d) })
}

impl PoweredGraph {
    pub fn base(&self) -> &ConstraintGraph {
        &self.base
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn base_degree(&self) -> usize {
        self.d
    }

    pub fn walks(&self, len: usize) -> &[Walk] {
        &self.walks_by_len[len - 1]
    }

    pub fn all_walks(&self) -> impl Iterator<Item = (&Walk, &BigUint)> {
        self.walks_by_len.iter().zip(&self.multiplicity).flat_map(|(ws, m)| ws.iter().map(move |w| (w, m)))
    }

    pub fn num_walks(&self) -> usize {
        self.walks_by_len.iter().map(Vec::len).sum()
    }

    pub fn multiplicity(&self, len: usize) -> &BigUint {
        &self.multiplicity[len - 1]
    }

    /// `d'`, the row sum of the normalized adjacency.
    pub fn degree(&self) -> BigUint {
        powered_degree(self.r, self.radius, self.d)
    }

    /// Weighted number of edges (each directed walk once).
    pub fn total_weight(&self) -> BigUint {
        self.all_walks().map(|(_, m)| m.clone()).sum()
    }

    /// Weighted walk endpoints at `v`; a closed walk counts twice.
    pub fn weighted_incidence(&self, v: usize) -> BigUint {
        let mut acc = BigUint::zero();
        for (w, m) in self.all_walks() {
            let ends = (w.start == v) as u32 + (w.end() == v) as u32;
            if ends > 0 {
                acc += m * ends;
            }
        }
        acc
    }

    /// `A'[x][y] = Σ` multiplicities of walks from `x` to `y`.
    pub fn normalized_adjacency(&self) -> Vec<Vec<BigUint>> {
        let n = self.base.num_vertices();
        let mut a = vec![vec![BigUint::zero(); n]; n];
        for (w, m) in self.all_walks() {
            a[w.start][w.end()] += m;
        }
        a
    }

    /// `A' + A'^T`, the incidence matrix of walks read as undirected edges.
    pub fn incidence_matrix(&self) -> Vec<Vec<BigUint>> {
        let a = self.normalized_adjacency();
        let n = a.len();
        (0..n).map(|i| (0..n).map(|j| &a[i][j] + &a[j][i]).collect()).collect()
    }

    pub fn lambda_prime(&self) -> f64 {
        let a = self.normalized_adjacency();
        let n = a.len();
        let m = DMatrix::from_fn(n, n, |i, j| a[i][j].to_f64().unwrap_or(f64::INFINITY));
        symmetric_lambda(&m)
    }

    /// Weighted fraction of walks whose test the proof passes.
    pub fn value(&self, proof: &Proof) -> BigRational {
        let mut passed = BigUint::zero();
        for (w, m) in self.all_walks() {
            if test_walk(&self.base, proof, w) {
                passed += m;
            }
        }
        from_biguint(&passed) / from_biguint(&self.total_weight())
    }

    /// Walks (unweighted) whose test fails.
    pub fn failing_walks<'a>(&'a self, proof: &'a Proof) -> impl Iterator<Item = &'a Walk> + 'a {
        self.walks_by_len.iter().flatten().filter(move |w| !test_walk(&self.base, proof, w))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amplify::proof::lift_assignment;
    use crate::csp::{Alphabet, Assignment, Constraint};
    use crate::gen::{complete_neq, cycle_neq};

    #[test]
    fn k2_incidence() {
        let g = ConstraintGraph::binary(2, Alphabet::numeric(2), [(0, 1, Constraint::not_equal(2))]).unwrap();
        let p = power(&g, 2, 2, DEFAULT_WALK_CAP).unwrap();
        assert_eq!(p.num_walks(), 4);
        assert_eq!(p.weighted_incidence(0), BigUint::from(6u32));
        assert_eq!(p.degree(), BigUint::from(3u32));
    }

    #[test]
    fn incidence_formula_k4() {
        let g = complete_neq(4, 3);
        let p = power(&g, 2, 2, DEFAULT_WALK_CAP).unwrap();
        assert_eq!(p.walks(1).len(), 4 * 3);
        assert_eq!(p.walks(2).len(), 4 * 9);
        for v in 0..4 {
            assert_eq!(p.weighted_incidence(v), BigUint::from(54u32));
        }
        let a = p.incidence_matrix();
        for row in &a {
            assert_eq!(row.iter().sum::<BigUint>(), BigUint::from(54u32));
        }
    }

    #[test]
    fn reversal_is_walk() {
        let g = cycle_neq(5, 2);
        let p = power(&g, 3, 3, DEFAULT_WALK_CAP).unwrap();
        for (w, _) in p.all_walks() {
            assert!(w.is_chained());
            assert!(w.reversed().is_chained());
            assert_eq!(w.reversed().reversed(), *w);
        }
    }

    #[test]
    fn value_of_satisfying_lift_is_one() {
        let g = cycle_neq(6, 2);
        let psi = Assignment::from_indices(&[0, 1, 0, 1, 0, 1]);
        let p = power(&g, 2, 3, DEFAULT_WALK_CAP).unwrap();
        let proof = lift_assignment(&g, &psi, 3).unwrap();
        assert_eq!(p.value(&proof), BigRational::from_integer(1.into()));
    }

    #[test]
    fn caps_and_regularity() {
        let g = cycle_neq(6, 2);
        assert!(matches!(power(&g, 2, 30, 1000), Err(Error::Capacity(_))));
        let path = ConstraintGraph::binary(3, Alphabet::numeric(2), [(0, 1, Constraint::Any), (1, 2, Constraint::Any)])
            .unwrap();
        assert!(matches!(power(&path, 2, 2, 1000), Err(Error::NotRegular(_))));
    }
}
