//! Constraint graphs, assignments and reconfiguration sequences.
//!
//! A `q`-ary constraint graph is a multiset of `q`-tuples of vertices (self-loops and
//! parallel edges allowed), an ordered alphabet, and one constraint per edge. The value
//! of an assignment is the exact fraction of edges it satisfies, counted with
//! multiplicity.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::ops::Index;
use std::sync::Arc;

use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::rational::ratio;

/// Index of a token in an [`Alphabet`]. The numeric order is the alphabet order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(pub u32);

impl Symbol {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// An ordered list of distinct tokens. The order is the global tie-break order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alphabet {
    tokens: Vec<String>,
    lookup: HashMap<String, Symbol>,
}

impl Alphabet {
    pub fn new<I, S>(tokens: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let tokens: Vec<String> = tokens.into_iter().map(Into::into).collect();
        if tokens.is_empty() {
            return Err(Error::validation("alphabet must be nonempty"));
        }
        let mut lookup = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if lookup.insert(t.clone(), Symbol(i as u32)).is_some() {
                return Err(Error::validation(format!("duplicate alphabet token {t:?}")));
            }
        }
        Ok(Alphabet { tokens, lookup })
    }

    /// The alphabet `{"0", "1", ..., "w-1"}`.
    pub fn numeric(w: usize) -> Self {
        Alphabet::new((0..w).map(|i| i.to_string())).expect("w >= 1")
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn token(&self, s: Symbol) -> &str {
        &self.tokens[s.index()]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn symbol(&self, token: &str) -> Option<Symbol> {
        self.lookup.get(token).copied()
    }

    pub fn contains(&self, s: Symbol) -> bool {
        s.index() < self.tokens.len()
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> + '_ {
        (0..self.tokens.len() as u32).map(Symbol)
    }
}

pub type Predicate = Arc<dyn Fn(&[Symbol]) -> bool + Send + Sync>;

/// The relation of one edge, read in the edge's member order.
#[derive(Clone)]
pub enum Constraint {
    /// Every tuple is allowed.
    Any,
    /// Explicit set of allowed tuples.
    Table(BTreeSet<Vec<Symbol>>),
    /// Lazily evaluated relation; never enumerated.
    Predicate(Predicate),
}

impl Constraint {
    pub fn table<I>(tuples: I) -> Self
    where
        I: IntoIterator<Item = Vec<Symbol>>,
    {
        Constraint::Table(tuples.into_iter().collect())
    }

    pub fn predicate<F>(f: F) -> Self
    where
        F: Fn(&[Symbol]) -> bool + Send + Sync + 'static,
    {
        Constraint::Predicate(Arc::new(f))
    }

    /// Binary inequality `{(a, b) : a != b}` over an alphabet of size `w`.
    pub fn not_equal(w: usize) -> Self {
        let mut t = BTreeSet::new();
        for a in 0..w as u32 {
            for b in 0..w as u32 {
                if a != b {
                    t.insert(vec![Symbol(a), Symbol(b)]);
                }
            }
        }
        Constraint::Table(t)
    }

    pub fn allows(&self, tuple: &[Symbol]) -> bool {
        match self {
            Constraint::Any => true,
            Constraint::Table(t) => t.contains(tuple),
            Constraint::Predicate(p) => p(tuple),
        }
    }

    pub fn is_predicate(&self) -> bool {
        matches!(self, Constraint::Predicate(_))
    }
}

impl fmt::Debug for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::Any => f.write_str("Any"),
            Constraint::Table(t) => f.debug_tuple("Table").field(t).finish(),
            Constraint::Predicate(_) => f.write_str("Predicate(..)"),
        }
    }
}

impl PartialEq for Constraint {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Constraint::Any, Constraint::Any) => true,
            (Constraint::Table(a), Constraint::Table(b)) => a == b,
            (Constraint::Predicate(a), Constraint::Predicate(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub members: Vec<usize>,
    pub constraint: Constraint,
}

impl Edge {
    pub fn new(members: Vec<usize>, constraint: Constraint) -> Self {
        Edge { members, constraint }
    }
}

/// One traversal of a binary edge. A self-loop has two traversals, told apart by `forward`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Step {
    pub edge: usize,
    pub from: usize,
    pub to: usize,
    pub forward: bool,
}

#[derive(Clone, Debug)]
pub struct ConstraintGraph {
    arity: usize,
    vertices: Vec<String>,
    edges: Vec<Edge>,
    alphabet: Alphabet,
    // Outgoing half-edges per vertex; only populated for binary graphs.
    steps: Vec<Vec<Step>>,
}

impl PartialEq for ConstraintGraph {
    fn eq(&self, other: &Self) -> bool {
        self.arity == other.arity
            && self.vertices == other.vertices
            && self.edges == other.edges
            && self.alphabet == other.alphabet
    }
}

impl ConstraintGraph {
    pub fn new(
        arity: usize,
        vertices: Vec<String>,
        alphabet: Alphabet,
        edges: Vec<Edge>,
    ) -> Result<Self> {
        if arity == 0 {
            return Err(Error::validation("arity must be positive"));
        }
        let mut seen = HashMap::new();
        for (i, v) in vertices.iter().enumerate() {
            if seen.insert(v.as_str(), i).is_some() {
                return Err(Error::validation(format!("duplicate vertex {v:?}")));
            }
        }
        let n = vertices.len();
        for (i, e) in edges.iter().enumerate() {
            if e.members.len() != arity {
                return Err(Error::validation(format!(
                    "edge {i} has {} members, expected {arity}",
                    e.members.len()
                )));
            }
            if let Some(&m) = e.members.iter().find(|&&m| m >= n) {
                return Err(Error::validation(format!("edge {i} references unknown vertex {m}")));
            }
            if let Constraint::Table(t) = &e.constraint {
                for tuple in t {
                    if tuple.len() != arity || tuple.iter().any(|s| !alphabet.contains(*s)) {
                        return Err(Error::validation(format!(
                            "edge {i} allows a tuple outside the alphabet: {tuple:?}"
                        )));
                    }
                }
            }
        }
        let mut steps = vec![Vec::new(); n];
        if arity == 2 {
            for (i, e) in edges.iter().enumerate() {
                let (u, w) = (e.members[0], e.members[1]);
                steps[u].push(Step { edge: i, from: u, to: w, forward: true });
                steps[w].push(Step { edge: i, from: w, to: u, forward: false });
            }
        }
        Ok(ConstraintGraph { arity, vertices, edges, alphabet, steps })
    }

    /// Binary graph on vertices named `"0"`, `"1"`, ...
    pub fn binary(
        n: usize,
        alphabet: Alphabet,
        edges: impl IntoIterator<Item = (usize, usize, Constraint)>,
    ) -> Result<Self> {
        let edges = edges.into_iter().map(|(u, v, c)| Edge::new(vec![u, v], c)).collect();
        ConstraintGraph::new(2, (0..n).map(|i| i.to_string()).collect(), alphabet, edges)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_binary(&self) -> bool {
        self.arity == 2
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn vertex_index(&self, name: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v == name)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, i: usize) -> &Edge {
        &self.edges[i]
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub(crate) fn require_binary(&self, what: &str) -> Result<()> {
        if self.arity == 2 {
            Ok(())
        } else {
            Err(Error::validation(format!("{what} requires a binary constraint graph, got arity {}", self.arity)))
        }
    }

    /// Outgoing traversals at `v` (binary graphs). A self-loop contributes two.
    pub fn steps_from(&self, v: usize) -> &[Step] {
        &self.steps[v]
    }

    /// Number of (edge, position) incidences at `v`; a binary self-loop counts twice.
    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().map(|e| e.members.iter().filter(|&&m| m == v).count()).sum()
    }

    pub fn regular_degree(&self) -> Option<usize> {
        let mut deg = vec![0usize; self.num_vertices()];
        for e in &self.edges {
            for &m in &e.members {
                deg[m] += 1;
            }
        }
        let first = *deg.first()?;
        deg.iter().all(|&d| d == first).then_some(first)
    }

    pub(crate) fn require_regular(&self) -> Result<usize> {
        match self.regular_degree() {
            Some(d) if d > 0 => Ok(d),
            Some(_) => Err(Error::NotRegular("graph has no edges".into())),
            None => Err(Error::NotRegular("vertex degrees differ".into())),
        }
    }

    pub fn edge_satisfied(&self, e: usize, psi: &Assignment) -> bool {
        let edge = &self.edges[e];
        let mut buf = [Symbol(0); 8];
        if edge.members.len() <= buf.len() {
            for (slot, &m) in buf.iter_mut().zip(&edge.members) {
                *slot = psi[m];
            }
            edge.constraint.allows(&buf[..edge.members.len()])
        } else {
            let tuple: Vec<Symbol> = edge.members.iter().map(|&m| psi[m]).collect();
            edge.constraint.allows(&tuple)
        }
    }

    /// Satisfied edges, with multiplicity. Assumes `psi` has been validated.
    pub fn satisfied_count(&self, psi: &Assignment) -> usize {
        (0..self.edges.len()).filter(|&e| self.edge_satisfied(e, psi)).count()
    }

    pub fn is_satisfying(&self, psi: &Assignment) -> bool {
        (0..self.edges.len()).all(|e| self.edge_satisfied(e, psi))
    }

    /// Vertices sharing an edge with `v` (with repetition for parallel edges).
    fn neighbours(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.num_vertices()];
        for e in &self.edges {
            for &a in &e.members {
                for &b in &e.members {
                    if a != b {
                        adj[a].push(b);
                    }
                }
            }
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        adj
    }

    /// Hop distances from `source`; `None` for unreachable vertices.
    pub fn distances_from(&self, source: usize) -> Vec<Option<usize>> {
        bfs_distances(&self.neighbours(), source)
    }

    /// All-pairs hop distances.
    pub fn distance_matrix(&self) -> Vec<Vec<Option<usize>>> {
        let adj = self.neighbours();
        (0..self.num_vertices()).map(|s| bfs_distances(&adj, s)).collect()
    }

    /// Vertices within distance `radius` of `v`, in vertex order.
    pub fn ball(&self, v: usize, radius: usize) -> Vec<usize> {
        self.distances_from(v)
            .iter()
            .enumerate()
            .filter_map(|(u, d)| matches!(d, Some(d) if *d <= radius).then_some(u))
            .collect()
    }
}

fn bfs_distances(adj: &[Vec<usize>], source: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; adj.len()];
    dist[source] = Some(0);
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        let du = dist[u].unwrap();
        for &w in &adj[u] {
            if dist[w].is_none() {
                dist[w] = Some(du + 1);
                queue.push_back(w);
            }
        }
    }
    dist
}

/// A total map from vertex index to symbol.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Assignment(Vec<Symbol>);

impl Assignment {
    pub fn new(values: Vec<Symbol>) -> Self {
        Assignment(values)
    }

    pub fn from_indices(values: &[u32]) -> Self {
        Assignment(values.iter().map(|&v| Symbol(v)).collect())
    }

    pub fn uniform(n: usize, s: Symbol) -> Self {
        Assignment(vec![s; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[Symbol] {
        &self.0
    }

    pub fn set(&mut self, v: usize, s: Symbol) {
        self.0[v] = s;
    }

    pub fn with(&self, v: usize, s: Symbol) -> Self {
        let mut next = self.clone();
        next.set(v, s);
        next
    }

    /// Vertices at which the two assignments disagree, in vertex order.
    pub fn differing_vertices(&self, other: &Assignment) -> Vec<usize> {
        self.0
            .iter()
            .zip(&other.0)
            .enumerate()
            .filter_map(|(v, (a, b))| (a != b).then_some(v))
            .collect()
    }

    pub fn validate(&self, g: &ConstraintGraph) -> Result<()> {
        if self.0.len() != g.num_vertices() {
            return Err(Error::validation(format!(
                "assignment has {} values but the graph has {} vertices",
                self.0.len(),
                g.num_vertices()
            )));
        }
        if let Some((v, s)) = self.0.iter().enumerate().find(|(_, s)| !g.alphabet().contains(**s)) {
            return Err(Error::validation(format!("vertex {v} takes symbol {} outside the alphabet", s.0)));
        }
        Ok(())
    }
}

impl Index<usize> for Assignment {
    type Output = Symbol;

    fn index(&self, v: usize) -> &Symbol {
        &self.0[v]
    }
}

/// An ordered, nonempty list of assignments.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReconfigurationSequence(Vec<Assignment>);

impl ReconfigurationSequence {
    pub fn new(steps: Vec<Assignment>) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::validation("reconfiguration sequence must be nonempty"));
        }
        Ok(ReconfigurationSequence(steps))
    }

    pub fn single(psi: Assignment) -> Self {
        ReconfigurationSequence(vec![psi])
    }

    pub fn steps(&self) -> &[Assignment] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> &Assignment {
        &self.0[0]
    }

    pub fn last(&self) -> &Assignment {
        self.0.last().unwrap()
    }

    pub fn into_steps(self) -> Vec<Assignment> {
        self.0
    }

    pub fn reversed(&self) -> Self {
        ReconfigurationSequence(self.0.iter().rev().cloned().collect())
    }

    /// Appends `other`, dropping its first step when it repeats our last one.
    pub fn extend_with(&mut self, other: ReconfigurationSequence) {
        let mut it = other.0.into_iter().peekable();
        if it.peek() == self.0.last() {
            it.next();
        }
        self.0.extend(it);
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ViolationReason {
    Domain(String),
    MultiVertexChange(usize),
}

/// The first position at which a sequence breaks its invariants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SequenceViolation {
    pub index: usize,
    pub reason: ViolationReason,
}

impl fmt::Display for SequenceViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.reason {
            ViolationReason::Domain(msg) => write!(f, "step {}: {msg}", self.index),
            ViolationReason::MultiVertexChange(k) => {
                write!(f, "step {} changes {k} vertices (at most one allowed)", self.index)
            }
        }
    }
}

impl From<SequenceViolation> for Error {
    fn from(v: SequenceViolation) -> Self {
        Error::Validation(v.to_string())
    }
}

/// Exact fraction of edges satisfied by `psi`.
pub fn value(g: &ConstraintGraph, psi: &Assignment) -> Result<BigRational> {
    if g.num_edges() == 0 {
        return Err(Error::ValueUndefined);
    }
    psi.validate(g)?;
    Ok(ratio(g.satisfied_count(psi), g.num_edges()))
}

/// Checks domains and the one-vertex-per-step rule, reporting the first failure.
pub fn validate_sequence(
    g: &ConstraintGraph,
    seq: &ReconfigurationSequence,
) -> std::result::Result<(), SequenceViolation> {
    for (i, psi) in seq.steps().iter().enumerate() {
        if let Err(e) = psi.validate(g) {
            return Err(SequenceViolation { index: i, reason: ViolationReason::Domain(e.to_string()) });
        }
        if i > 0 {
            let changed = seq.steps()[i - 1].differing_vertices(psi).len();
            if changed > 1 {
                return Err(SequenceViolation {
                    index: i,
                    reason: ViolationReason::MultiVertexChange(changed),
                });
            }
        }
    }
    Ok(())
}

/// Minimum value over the steps of a valid sequence.
pub fn sequence_value(g: &ConstraintGraph, seq: &ReconfigurationSequence) -> Result<BigRational> {
    if g.num_edges() == 0 {
        return Err(Error::ValueUndefined);
    }
    validate_sequence(g, seq)?;
    let worst = seq.steps().iter().map(|psi| g.satisfied_count(psi)).min().unwrap();
    Ok(ratio(worst, g.num_edges()))
}
