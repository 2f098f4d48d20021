//! Proofs over the squared alphabet, lifting, completeness sequences and decoding.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use super::squared::SqSymbol;
use crate::csp::{Assignment, ConstraintGraph, ReconfigurationSequence, Symbol};
use crate::error::{Error, Result};
use crate::spectral::SimpleMultigraph;

/// For each proof vertex `x`, opinions about every base vertex within distance `radius`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Proof {
    radius: usize,
    // Sorted by base vertex.
    opinions: Vec<Vec<(usize, SqSymbol)>>,
}

impl Proof {
    /// Builds a proof from explicit opinion lists; each list is sorted on entry.
    pub fn from_opinions(radius: usize, mut opinions: Vec<Vec<(usize, SqSymbol)>>) -> Self {
        for row in &mut opinions {
            row.sort_by_key(|&(v, _)| v);
        }
        Proof { radius, opinions }
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn num_vertices(&self) -> usize {
        self.opinions.len()
    }

    pub fn opinions_of(&self, x: usize) -> &[(usize, SqSymbol)] {
        &self.opinions[x]
    }

    /// `x`'s opinion about `v`, `None` when undefined.
    pub fn get(&self, x: usize, v: usize) -> Option<SqSymbol> {
        let row = &self.opinions[x];
        row.binary_search_by_key(&v, |&(u, _)| u).ok().map(|i| row[i].1)
    }

    /// Overwrites a defined opinion; returns false when `x` has no opinion about `v`.
    pub fn set(&mut self, x: usize, v: usize, s: SqSymbol) -> bool {
        let row = &mut self.opinions[x];
        match row.binary_search_by_key(&v, |&(u, _)| u) {
            Ok(i) => {
                row[i].1 = s;
                true
            }
            Err(_) => false,
        }
    }

    /// Proof vertices whose whole opinion vector differs.
    pub fn differing_vertices(&self, other: &Proof) -> Vec<usize> {
        (0..self.opinions.len()).filter(|&x| self.opinions[x] != other.opinions[x]).collect()
    }

    /// `(vertex, in-ball vertex, squared symbol index)` triples for debugging dumps.
    pub fn compact_dump(&self, index_of: impl Fn(SqSymbol) -> usize) -> Vec<(usize, usize, usize)> {
        self.opinions
            .iter()
            .enumerate()
            .flat_map(|(x, row)| row.iter().map(move |&(v, s)| (x, v, s)).collect::<Vec<_>>())
            .map(|(x, v, s)| (x, v, index_of(s)))
            .collect()
    }

    pub fn validate_against(&self, g: &ConstraintGraph) -> Result<()> {
        if self.opinions.len() != g.num_vertices() {
            return Err(Error::validation(format!(
                "proof has {} vertices but the graph has {}",
                self.opinions.len(),
                g.num_vertices()
            )));
        }
        let w = g.alphabet().len() as u32;
        for (x, row) in self.opinions.iter().enumerate() {
            if let Some(&(v, s)) = row.iter().find(|(v, s)| *v >= g.num_vertices() || s.hi().0 >= w) {
                return Err(Error::validation(format!("proof vertex {x} has an invalid opinion {s:?} about {v}")));
            }
        }
        Ok(())
    }
}

/// Balls of radius `radius` around every vertex, in vertex order.
pub fn balls(g: &ConstraintGraph, radius: usize) -> Vec<Vec<usize>> {
    g.distance_matrix()
        .into_iter()
        .map(|row| {
            row.into_iter()
                .enumerate()
                .filter_map(|(v, d)| matches!(d, Some(d) if d <= radius).then_some(v))
                .collect()
        })
        .collect()
}

/// Every proof vertex holds the singleton `{ψ(v)}` for each `v` in its ball.
pub fn lift_assignment(g: &ConstraintGraph, psi: &Assignment, radius: usize) -> Result<Proof> {
    psi.validate(g)?;
    let opinions = balls(g, radius)
        .into_iter()
        .map(|ball| ball.into_iter().map(|v| (v, SqSymbol::single(psi[v]))).collect())
        .collect();
    Ok(Proof { radius, opinions })
}

/// Proof sequence from `lift(from)` to `lift(to)` for satisfying assignments differing
/// at one vertex `v`: every ball member first switches its opinion on `v` to the pair,
/// then to the new singleton.
pub fn completeness_sequence(
    g: &ConstraintGraph,
    from: &Assignment,
    to: &Assignment,
    radius: usize,
) -> Result<Vec<Proof>> {
    from.validate(g)?;
    to.validate(g)?;
    if !g.is_satisfying(from) || !g.is_satisfying(to) {
        return Err(Error::validation("completeness sequences need satisfying endpoints"));
    }
    let diff = from.differing_vertices(to);
    let start = lift_assignment(g, from, radius)?;
    let v = match diff.as_slice() {
        [] => return Ok(vec![start]),
        [v] => *v,
        _ => return Err(Error::validation(format!("endpoints differ in {} vertices, expected one", diff.len()))),
    };
    let looped = g.steps_from(v).iter().any(|s| {
        s.to == v && {
            let c = &g.edge(s.edge).constraint;
            !(c.allows(&[from[v], to[v]]) && c.allows(&[to[v], from[v]]))
        }
    });
    if looped {
        return Err(Error::validation(format!("a self-loop at vertex {v} rejects the pair opinion")));
    }
    let pair = SqSymbol::pair(from[v], to[v]);
    let single = SqSymbol::single(to[v]);
    let ball = g.ball(v, radius);
    let mut seq = Vec::with_capacity(2 * ball.len() + 1);
    let mut cur = start;
    seq.push(cur.clone());
    for target in [pair, single] {
        for &x in &ball {
            cur.set(x, v, target);
            seq.push(cur.clone());
        }
    }
    Ok(seq)
}

/// Precomputed endpoint weights of the length-conditioned stopping walk.
///
/// For a walk from `v` of length `k < R`, the weight of ending at `y` is
/// `(r-1)^k r^(R-1-k) d^(R-1-k) (A^k)[v][y]`, an integer multiple of the probability.
#[derive(Clone, Debug)]
pub struct Voter {
    weights: Vec<Vec<(usize, BigUint)>>,
    radius: usize,
}

impl Voter {
    pub fn new(g: &ConstraintGraph, r: usize, radius: usize) -> Result<Self> {
        g.require_binary("the popularity vote")?;
        if r < 2 {
            return Err(Error::validation("r must be at least 2"));
        }
        if radius == 0 {
            return Err(Error::validation("R must be at least 1"));
        }
        let d = g.require_regular()?;
        let a = SimpleMultigraph::from_constraint_graph(g)?;
        let n = g.num_vertices();
        let big = |x: usize| BigUint::from(x);
        let mut weights = Vec::with_capacity(n);
        for v in 0..n {
            let mut acc = vec![BigUint::zero(); n];
            let mut walk_counts = vec![BigUint::zero(); n];
            walk_counts[v] = BigUint::one();
            for k in 0..radius {
                let coeff = big(r - 1).pow(k as u32) * big(r).pow((radius - 1 - k) as u32)
                    * big(d).pow((radius - 1 - k) as u32);
                for (y, c) in walk_counts.iter().enumerate() {
                    if !c.is_zero() {
                        acc[y] += &coeff * c;
                    }
                }
                if k + 1 < radius {
                    let mut next = vec![BigUint::zero(); n];
                    for (u, c) in walk_counts.iter().enumerate() {
                        if c.is_zero() {
                            continue;
                        }
                        for (y, &m) in a.row(u).iter().enumerate() {
                            if m > 0 {
                                next[y] += c * m;
                            }
                        }
                    }
                    walk_counts = next;
                }
            }
            weights.push(acc.into_iter().enumerate().filter(|(_, w)| !w.is_zero()).collect());
        }
        Ok(Voter { weights, radius })
    }

    /// Unnormalized endpoint weights for walks from `v`.
    pub fn endpoint_weights(&self, v: usize) -> &[(usize, BigUint)] {
        &self.weights[v]
    }

    /// Weighted support of each base symbol for vertex `v`.
    pub fn scores(&self, proof: &Proof, v: usize, w: usize) -> Vec<BigUint> {
        let mut scores = vec![BigUint::zero(); w];
        for (y, weight) in &self.weights[v] {
            if let Some(op) = proof.get(*y, v) {
                for a in op.members() {
                    scores[a.index()] += weight;
                }
            }
        }
        scores
    }

    pub fn vote(&self, g: &ConstraintGraph, proof: &Proof) -> Result<Assignment> {
        proof.validate_against(g)?;
        if proof.radius() + 1 < self.radius {
            return Err(Error::validation(format!(
                "proof radius {} is too small for votes with R = {}",
                proof.radius(),
                self.radius
            )));
        }
        let w = g.alphabet().len();
        let values = (0..g.num_vertices())
            .map(|v| {
                let scores = self.scores(proof, v, w);
                // First maximum in alphabet order wins ties.
                let mut best = 0;
                for a in 1..w {
                    if scores[a] > scores[best] {
                        best = a;
                    }
                }
                Symbol(best as u32)
            })
            .collect();
        Ok(Assignment::new(values))
    }
}

pub fn popularity_vote(g: &ConstraintGraph, proof: &Proof, r: usize, radius: usize) -> Result<Assignment> {
    Voter::new(g, r, radius)?.vote(g, proof)
}

/// Changes the differing vertices one at a time, in vertex order.
pub fn interpolate(from: &Assignment, to: &Assignment) -> ReconfigurationSequence {
    let mut cur = from.clone();
    let mut steps = vec![cur.clone()];
    for v in from.differing_vertices(to) {
        cur.set(v, to[v]);
        steps.push(cur.clone());
    }
    ReconfigurationSequence::new(steps).expect("nonempty")
}

/// Votes every proof and bridges consecutive votes with [`interpolate`].
pub fn decode_proof_sequence(
    g: &ConstraintGraph,
    proofs: &[Proof],
    r: usize,
    radius: usize,
) -> Result<ReconfigurationSequence> {
    if proofs.is_empty() {
        return Err(Error::validation("proof sequence must be nonempty"));
    }
    for (i, pair) in proofs.windows(2).enumerate() {
        let changed = pair[0].differing_vertices(&pair[1]).len();
        if changed > 1 {
            return Err(Error::validation(format!(
                "proof step {} changes {changed} proof vertices (at most one allowed)",
                i + 1
            )));
        }
    }
    let voter = Voter::new(g, r, radius)?;
    let votes = proofs.iter().map(|p| voter.vote(g, p)).collect::<Result<Vec<_>>>()?;
    let mut seq = ReconfigurationSequence::single(votes[0].clone());
    for pair in votes.windows(2) {
        seq.extend_with(interpolate(&pair[0], &pair[1]));
    }
    Ok(seq)
}
