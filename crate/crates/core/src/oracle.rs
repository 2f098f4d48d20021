//! Exact exhaustive solvers used as ground truth.
//!
//! Assignments are encoded in mixed radix: vertex `v` is digit `v` in base `|Σ|`, vertex
//! 0 least significant.

use std::collections::{HashMap, VecDeque};

use num_rational::BigRational;

use crate::covering::{Cover, CoverSequence, SetSystem};
use crate::csp::{Assignment, ConstraintGraph, ReconfigurationSequence, Symbol};
use crate::error::{Error, Result};
use crate::rational::ratio;

pub const DEFAULT_STATE_CAP: u64 = 2_000_000;
pub const DEFAULT_COVER_CAP: u64 = 1 << 20;

#[derive(Clone, Debug, PartialEq)]
pub struct MaximinResult {
    pub value: BigRational,
    /// Satisfied-edge count achieved by the worst step of the witness.
    pub satisfied: usize,
    pub witness: ReconfigurationSequence,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MinmaxCoverResult {
    pub cost: BigRational,
    /// Largest cover size along the witness.
    pub max_size: usize,
    pub opt: usize,
    pub witness: CoverSequence,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinCover {
    pub size: usize,
    pub cover: Cover,
}

/// Number of assignments, or a capacity error when above `cap`.
pub fn state_count(g: &ConstraintGraph, cap: u64) -> Result<u64> {
    let w = g.alphabet().len() as u64;
    let mut total: u64 = 1;
    for _ in 0..g.num_vertices() {
        total = match total.checked_mul(w) {
            Some(t) if t <= cap => t,
            _ => {
                return Err(Error::capacity(format!(
                    "|Σ|^|V| = {w}^{} exceeds the state cap {cap}",
                    g.num_vertices()
                )))
            }
        };
    }
    if total > cap {
        return Err(Error::capacity(format!("{total} states exceed the cap {cap}")));
    }
    Ok(total)
}

pub fn encode(psi: &Assignment, w: usize) -> u64 {
    psi.values().iter().rev().fold(0u64, |acc, s| acc * w as u64 + s.0 as u64)
}

pub fn decode(mut state: u64, n: usize, w: usize) -> Assignment {
    let mut vals = Vec::with_capacity(n);
    for _ in 0..n {
        vals.push(Symbol((state % w as u64) as u32));
        state /= w as u64;
    }
    Assignment::new(vals)
}

/// Per-edge evaluation: a dense truth table when small enough, else the constraint.
enum EdgeEval {
    Dense { members: Vec<usize>, table: Vec<bool> },
    Direct { members: Vec<usize>, edge: usize },
}

const DENSE_TABLE_LIMIT: usize = 1 << 20;

fn edge_evaluators(g: &ConstraintGraph) -> Vec<EdgeEval> {
    let w = g.alphabet().len();
    g.edges()
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let q = e.members.len();
            let size = w.checked_pow(q as u32).filter(|&s| s <= DENSE_TABLE_LIMIT);
            match size {
                Some(size) => {
                    let mut tuple = vec![Symbol(0); q];
                    let table = (0..size)
                        .map(|mut idx| {
                            for slot in tuple.iter_mut() {
                                *slot = Symbol((idx % w) as u32);
                                idx /= w;
                            }
                            e.constraint.allows(&tuple)
                        })
                        .collect();
                    EdgeEval::Dense { members: e.members.clone(), table }
                }
                None => EdgeEval::Direct { members: e.members.clone(), edge: i },
            }
        })
        .collect()
}

/// Satisfied-edge count of every assignment, indexed by state code.
pub fn satisfied_counts(g: &ConstraintGraph, cap: u64) -> Result<Vec<u32>> {
    let total = state_count(g, cap)? as usize;
    let n = g.num_vertices();
    let w = g.alphabet().len();
    let evals = edge_evaluators(g);
    let mut digits = vec![0usize; n];
    let mut tuple = Vec::new();
    let mut counts = Vec::with_capacity(total);
    for _ in 0..total {
        let mut c = 0u32;
        for ev in &evals {
            let ok = match ev {
                EdgeEval::Dense { members, table } => {
                    let idx = members.iter().rev().fold(0usize, |acc, &m| acc * w + digits[m]);
                    table[idx]
                }
                EdgeEval::Direct { members, edge } => {
                    tuple.clear();
                    tuple.extend(members.iter().map(|&m| Symbol(digits[m] as u32)));
                    g.edge(*edge).constraint.allows(&tuple)
                }
            };
            c += ok as u32;
        }
        counts.push(c);
        for d in digits.iter_mut() {
            *d += 1;
            if *d < w {
                break;
            }
            *d = 0;
        }
    }
    Ok(counts)
}

struct UnionFind {
    parent: Vec<u32>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n as u32).collect(), rank: vec![0; n] }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = p;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra as usize].cmp(&self.rank[rb as usize]) {
            std::cmp::Ordering::Less => self.parent[ra as usize] = rb,
            std::cmp::Ordering::Greater => self.parent[rb as usize] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb as usize] = ra;
                self.rank[ra as usize] += 1;
            }
        }
    }
}

fn neighbours(state: u64, n: usize, w: usize, mut f: impl FnMut(u64)) {
    let mut place = 1u64;
    let mut rest = state;
    for _ in 0..n {
        let digit = rest % w as u64;
        rest /= w as u64;
        let base = state - digit * place;
        for s in 0..w as u64 {
            if s != digit {
                f(base + s * place);
            }
        }
        place *= w as u64;
    }
}

fn check_endpoint(g: &ConstraintGraph, psi: &Assignment) -> Result<()> {
    psi.validate(g)
}

/// Best achievable minimum value over reconfiguration sequences from `ini` to `tar`.
pub fn maximin_reconf_value(
    g: &ConstraintGraph,
    ini: &Assignment,
    tar: &Assignment,
    cap: u64,
) -> Result<MaximinResult> {
    if g.num_edges() == 0 {
        return Err(Error::ValueUndefined);
    }
    check_endpoint(g, ini)?;
    check_endpoint(g, tar)?;
    let n = g.num_vertices();
    let w = g.alphabet().len();
    let m = g.num_edges();
    let counts = satisfied_counts(g, cap)?;
    let (a, b) = (encode(ini, w), encode(tar, w));

    let threshold = if a == b {
        counts[a as usize]
    } else {
        // Insert states in descending count, a whole level at a time.
        let mut buckets = vec![Vec::new(); m + 1];
        for (s, &c) in counts.iter().enumerate() {
            buckets[c as usize].push(s as u32);
        }
        let mut uf = UnionFind::new(counts.len());
        let mut found = None;
        for level in (0..=m).rev() {
            for &s in &buckets[level] {
                neighbours(s as u64, n, w, |t| {
                    if counts[t as usize] as usize >= level {
                        uf.union(s, t as u32);
                    }
                });
            }
            let floor = counts[a as usize].min(counts[b as usize]) as usize;
            if level <= floor && uf.find(a as u32) == uf.find(b as u32) {
                found = Some(level as u32);
                break;
            }
        }
        found.expect("the full state space is connected")
    };

    let witness = level_set_path(&counts, threshold, a, b, n, w);
    let steps: Vec<Assignment> = witness.into_iter().map(|s| decode(s, n, w)).collect();
    Ok(MaximinResult {
        value: ratio(threshold as usize, m),
        satisfied: threshold as usize,
        witness: ReconfigurationSequence::new(steps)?,
    })
}

/// Shortest path from `a` to `b` through states with count at least `threshold`.
fn level_set_path(counts: &[u32], threshold: u32, a: u64, b: u64, n: usize, w: usize) -> Vec<u64> {
    const UNSEEN: u32 = u32::MAX;
    let mut parent = vec![UNSEEN; counts.len()];
    parent[a as usize] = a as u32;
    let mut queue = VecDeque::from([a]);
    while let Some(s) = queue.pop_front() {
        if s == b {
            break;
        }
        neighbours(s, n, w, |t| {
            if parent[t as usize] == UNSEEN && counts[t as usize] >= threshold {
                parent[t as usize] = s as u32;
                queue.push_back(t);
            }
        });
    }
    let mut path = vec![b];
    let mut cur = b;
    while cur != a {
        cur = parent[cur as usize] as u64;
        path.push(cur);
    }
    path.reverse();
    path
}

/// Maximum value over all assignments, with one maximiser (smallest state code).
pub fn opt_assignment(g: &ConstraintGraph, cap: u64) -> Result<(BigRational, Assignment)> {
    if g.num_edges() == 0 {
        return Err(Error::ValueUndefined);
    }
    let counts = satisfied_counts(g, cap)?;
    let (best, &c) = counts.iter().enumerate().max_by_key(|&(i, c)| (*c, std::cmp::Reverse(i))).unwrap();
    let psi = decode(best as u64, g.num_vertices(), g.alphabet().len());
    Ok((ratio(c as usize, g.num_edges()), psi))
}

pub fn opt_value(g: &ConstraintGraph, cap: u64) -> Result<BigRational> {
    opt_assignment(g, cap).map(|(v, _)| v)
}

struct CoverSearch<'a> {
    sets: Vec<Vec<usize>>,
    incidence: &'a [Vec<usize>],
    max_set: usize,
    best: Vec<usize>,
    nodes: u64,
    cap: u64,
}

impl CoverSearch<'_> {
    fn run(&mut self, chosen: &mut Vec<usize>, covered: &mut [u32], uncovered: usize) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.cap {
            return Err(Error::capacity(format!("set-cover search exceeded {} nodes", self.cap)));
        }
        if uncovered == 0 {
            if chosen.len() < self.best.len() {
                self.best = chosen.clone();
            }
            return Ok(());
        }
        let lower = chosen.len() + uncovered.div_ceil(self.max_set);
        if lower >= self.best.len() {
            return Ok(());
        }
        // Branch on the uncovered element with the fewest candidate sets.
        let e = (0..covered.len())
            .filter(|&e| covered[e] == 0)
            .min_by_key(|&e| self.incidence[e].len())
            .unwrap();
        let mut options = self.incidence[e].clone();
        options.sort_by_key(|&s| std::cmp::Reverse(self.sets[s].iter().filter(|&&x| covered[x] == 0).count()));
        for s in options {
            let mut gained = 0;
            for &x in &self.sets[s] {
                if covered[x] == 0 {
                    gained += 1;
                }
                covered[x] += 1;
            }
            chosen.push(s);
            let r = self.run(chosen, covered, uncovered - gained);
            chosen.pop();
            for &x in &self.sets[s] {
                covered[x] -= 1;
            }
            r?;
        }
        Ok(())
    }
}

/// Minimum cover by branch and bound. `cap` bounds the number of search nodes.
pub fn min_cover(sys: &SetSystem, cap: u64) -> Result<MinCover> {
    let uncovered = sys.uncovered_elements();
    if !uncovered.is_empty() {
        return Err(Error::validation(format!(
            "the family does not cover the universe ({} elements in no set)",
            uncovered.len()
        )));
    }
    let sets: Vec<Vec<usize>> = (0..sys.num_sets()).map(|s| sys.elements_of(s)).collect();
    let incidence = sys.incidence();
    let max_set = sets.iter().map(Vec::len).max().unwrap_or(1).max(1);
    let mut search = CoverSearch {
        best: greedy_cover(&sets, sys.universe_len()),
        sets,
        incidence: &incidence,
        max_set,
        nodes: 0,
        cap,
    };
    let mut covered = vec![0u32; sys.universe_len()];
    search.run(&mut Vec::new(), &mut covered, sys.universe_len())?;
    let cover = Cover::new(search.best.iter().copied());
    Ok(MinCover { size: cover.len(), cover })
}

fn greedy_cover(sets: &[Vec<usize>], universe: usize) -> Vec<usize> {
    let mut covered = vec![false; universe];
    let mut left = universe;
    let mut chosen = Vec::new();
    while left > 0 {
        let (s, gain) = sets
            .iter()
            .enumerate()
            .map(|(s, el)| (s, el.iter().filter(|&&x| !covered[x]).count()))
            .max_by_key(|&(s, g)| (g, std::cmp::Reverse(s)))
            .unwrap();
        debug_assert!(gain > 0);
        for &x in &sets[s] {
            covered[x] = true;
        }
        left -= gain;
        chosen.push(s);
    }
    chosen
}

pub fn min_cover_size(sys: &SetSystem, cap: u64) -> Result<usize> {
    min_cover(sys, cap).map(|c| c.size)
}

struct MaskSpace {
    element_masks: Vec<u64>,
    num_sets: usize,
}

impl MaskSpace {
    fn new(sys: &SetSystem, cap: u64) -> Result<Self> {
        let m = sys.num_sets();
        if m > 63 || (1u64 << m) > cap {
            return Err(Error::capacity(format!("2^{m} covers exceed the cap {cap}")));
        }
        let element_masks = sys.incidence().iter().map(|sets| sets.iter().fold(0u64, |acc, &s| acc | 1 << s)).collect();
        Ok(MaskSpace { element_masks, num_sets: m })
    }

    fn is_cover(&self, mask: u64) -> bool {
        self.element_masks.iter().all(|&e| e & mask != 0)
    }

    /// BFS over covers of size at most `k`; the path from `a` to `b` if one exists.
    fn path_within(&self, a: u64, b: u64, k: u32) -> Option<Vec<u64>> {
        let mut parent: HashMap<u64, u64> = HashMap::from([(a, a)]);
        let mut queue = VecDeque::from([a]);
        while let Some(s) = queue.pop_front() {
            if s == b {
                let mut path = vec![b];
                let mut cur = b;
                while cur != a {
                    cur = parent[&cur];
                    path.push(cur);
                }
                path.reverse();
                return Some(path);
            }
            for i in 0..self.num_sets {
                let t = s ^ (1 << i);
                if t.count_ones() <= k && !parent.contains_key(&t) && self.is_cover(t) {
                    parent.insert(t, s);
                    queue.push_back(t);
                }
            }
        }
        None
    }
}

/// Minimum over cover sequences of the largest cover, normalized by `OPT + 1`.
pub fn minmax_cover_cost(sys: &SetSystem, ini: &Cover, tar: &Cover, cap: u64) -> Result<MinmaxCoverResult> {
    sys.require_cover(ini, "initial cover")?;
    sys.require_cover(tar, "target cover")?;
    let space = MaskSpace::new(sys, cap)?;
    let opt = min_cover_size(sys, cap)?;
    let (a, b) = (ini.to_mask(), tar.to_mask());
    let mut lo = ini.len().max(tar.len()) as u32;
    let mut hi = ini.union(tar).len() as u32;
    let mut best = space.path_within(a, b, hi).expect("the union path is always feasible");
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        match space.path_within(a, b, mid) {
            Some(path) => {
                best = path;
                hi = mid;
            }
            None => lo = mid + 1,
        }
    }
    let witness = CoverSequence::new(best.into_iter().map(Cover::from_mask).collect())?;
    let max_size = witness.max_size();
    debug_assert_eq!(max_size as u32, lo);
    Ok(MinmaxCoverResult { cost: ratio(max_size, opt + 1), max_size, opt, witness })
}
