//! Set systems, cover reconfiguration, and the reductions from binary CSPs to set cover
//! and from set cover to dominating set.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use fixedbitset::FixedBitSet;
use num_rational::BigRational;
use num_traits::Zero;

use crate::csp::{Assignment, ConstraintGraph, Symbol};
use crate::error::{Error, Result};
use crate::rational::{ratio, to_f64};

/// Largest alphabet the Q-gadgets accept (the universe grows as `2^|Σ|` per edge).
pub const GADGET_CAP: usize = 12;

/// A universe with an indexed family of named subsets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetSystem {
    universe: Vec<String>,
    ids: Vec<String>,
    sets: Vec<FixedBitSet>,
    lookup: HashMap<String, usize>,
}

impl SetSystem {
    /// `family` lists each set as an id plus element indices into `universe`.
    pub fn new(universe: Vec<String>, family: Vec<(String, Vec<usize>)>) -> Result<Self> {
        let mut uniq = BTreeSet::new();
        for u in &universe {
            if !uniq.insert(u.as_str()) {
                return Err(Error::validation(format!("duplicate universe element {u:?}")));
            }
        }
        let mut ids = Vec::with_capacity(family.len());
        let mut sets = Vec::with_capacity(family.len());
        let mut lookup = HashMap::with_capacity(family.len());
        for (id, elems) in family {
            let mut bits = FixedBitSet::with_capacity(universe.len());
            for e in elems {
                if e >= universe.len() {
                    return Err(Error::validation(format!("set {id:?} references element {e} outside the universe")));
                }
                bits.insert(e);
            }
            if lookup.insert(id.clone(), ids.len()).is_some() {
                return Err(Error::validation(format!("duplicate set id {id:?}")));
            }
            ids.push(id);
            sets.push(bits);
        }
        Ok(SetSystem { universe, ids, sets, lookup })
    }

    /// Same as [`SetSystem::new`] with sets given by element labels.
    pub fn from_labels(universe: Vec<String>, family: Vec<(String, Vec<String>)>) -> Result<Self> {
        let pos: HashMap<&str, usize> = universe.iter().enumerate().map(|(i, u)| (u.as_str(), i)).collect();
        let mut resolved = Vec::with_capacity(family.len());
        for (id, elems) in family {
            let mut idx = Vec::with_capacity(elems.len());
            for e in &elems {
                match pos.get(e.as_str()) {
                    Some(&i) => idx.push(i),
                    None => return Err(Error::validation(format!("set {id:?} contains unknown element {e:?}"))),
                }
            }
            resolved.push((id, idx));
        }
        SetSystem::new(universe, resolved)
    }

    pub fn universe(&self) -> &[String] {
        &self.universe
    }

    pub fn universe_len(&self) -> usize {
        self.universe.len()
    }

    pub fn num_sets(&self) -> usize {
        self.sets.len()
    }

    pub fn set(&self, i: usize) -> &FixedBitSet {
        &self.sets[i]
    }

    pub fn set_id(&self, i: usize) -> &str {
        &self.ids[i]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn set_index(&self, id: &str) -> Option<usize> {
        self.lookup.get(id).copied()
    }

    pub fn elements_of(&self, i: usize) -> Vec<usize> {
        self.sets[i].ones().collect()
    }

    pub fn union_of<'a>(&self, sets: impl IntoIterator<Item = &'a usize>) -> FixedBitSet {
        let mut acc = FixedBitSet::with_capacity(self.universe.len());
        for &s in sets {
            acc.union_with(&self.sets[s]);
        }
        acc
    }

    pub fn covers(&self, c: &Cover) -> bool {
        c.0.iter().all(|&s| s < self.sets.len()) && self.union_of(&c.0).count_ones(..) == self.universe.len()
    }

    pub(crate) fn require_cover(&self, c: &Cover, name: &str) -> Result<()> {
        if let Some(&s) = c.0.iter().find(|&&s| s >= self.sets.len()) {
            return Err(Error::validation(format!("{name} references unknown set {s}")));
        }
        let missing = self.universe.len() - self.union_of(&c.0).count_ones(..);
        if missing > 0 {
            return Err(Error::validation(format!("{name} is not a cover ({missing} elements uncovered)")));
        }
        Ok(())
    }

    /// Elements contained in no set of the family.
    pub fn uncovered_elements(&self) -> Vec<usize> {
        let all: Vec<usize> = (0..self.sets.len()).collect();
        let u = self.union_of(&all);
        (0..self.universe.len()).filter(|&e| !u.contains(e)).collect()
    }

    /// For each element, the indices of the sets containing it.
    pub fn incidence(&self) -> Vec<Vec<usize>> {
        let mut inc = vec![Vec::new(); self.universe.len()];
        for (s, bits) in self.sets.iter().enumerate() {
            for e in bits.ones() {
                inc[e].push(s);
            }
        }
        inc
    }
}

/// A subfamily, stored as sorted set indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cover(pub BTreeSet<usize>);

impl Cover {
    pub fn new(sets: impl IntoIterator<Item = usize>) -> Self {
        Cover(sets.into_iter().collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, s: usize) -> bool {
        self.0.contains(&s)
    }

    pub fn union(&self, other: &Cover) -> Cover {
        Cover(self.0.union(&other.0).copied().collect())
    }

    pub fn symmetric_difference_len(&self, other: &Cover) -> usize {
        self.0.symmetric_difference(&other.0).count()
    }

    pub fn to_mask(&self) -> u64 {
        self.0.iter().fold(0u64, |m, &s| m | (1u64 << s))
    }

    pub fn from_mask(mask: u64) -> Self {
        Cover((0..64).filter(|&s| mask >> s & 1 == 1).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverSequence(pub Vec<Cover>);

impl CoverSequence {
    pub fn new(steps: Vec<Cover>) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::validation("cover sequence must be nonempty"));
        }
        Ok(CoverSequence(steps))
    }

    pub fn steps(&self) -> &[Cover] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_size(&self) -> usize {
        self.0.iter().map(Cover::len).max().unwrap_or(0)
    }

    /// Appends `other`, dropping its first step when it repeats our last one.
    pub fn extend_with(&mut self, other: CoverSequence) {
        let mut it = other.0.into_iter().peekable();
        if it.peek() == self.0.last() {
            it.next();
        }
        self.0.extend(it);
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverViolation {
    pub index: usize,
    pub reason: String,
}

impl fmt::Display for CoverViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "step {}: {}", self.index, self.reason)
    }
}

impl From<CoverViolation> for Error {
    fn from(v: CoverViolation) -> Self {
        Error::Validation(v.to_string())
    }
}

/// Every step must be a cover and consecutive steps differ by at most one set.
pub fn validate_cover_sequence(sys: &SetSystem, seq: &CoverSequence) -> std::result::Result<(), CoverViolation> {
    for (i, c) in seq.0.iter().enumerate() {
        if let Err(e) = sys.require_cover(c, "step") {
            return Err(CoverViolation { index: i, reason: e.to_string() });
        }
        if i > 0 {
            let diff = seq.0[i - 1].symmetric_difference_len(c);
            if diff > 1 {
                return Err(CoverViolation {
                    index: i,
                    reason: format!("changes {diff} sets (at most one allowed)"),
                });
            }
        }
    }
    Ok(())
}

/// `max_t |C_t| / (opt + 1)` for a valid sequence.
pub fn sequence_cost(sys: &SetSystem, seq: &CoverSequence, opt: usize) -> Result<BigRational> {
    validate_cover_sequence(sys, seq)?;
    Ok(ratio(seq.max_size(), opt + 1))
}

fn check_gadget(w: usize) -> Result<()> {
    if w == 0 {
        return Err(Error::validation("alphabet must be nonempty"));
    }
    if w > GADGET_CAP {
        return Err(Error::capacity(format!("alphabet size {w} exceeds the gadget cap {GADGET_CAP}")));
    }
    Ok(())
}

/// Bit vectors `q ∈ {0,1}^W` (bit `α` of the integer is coordinate `α`) with `q_α = 0`.
pub fn q_bar(alpha: Symbol, w: usize) -> Result<Vec<u32>> {
    check_gadget(w)?;
    if alpha.index() >= w {
        return Err(Error::validation(format!("symbol {} outside an alphabet of size {w}", alpha.0)));
    }
    Ok((0..1u32 << w).filter(|q| q >> alpha.0 & 1 == 0).collect())
}

/// Bit vectors with `q_α = 1` for some `α ∈ s`.
pub fn q_set(s: &[Symbol], w: usize) -> Result<Vec<u32>> {
    check_gadget(w)?;
    if let Some(a) = s.iter().find(|a| a.index() >= w) {
        return Err(Error::validation(format!("symbol {} outside an alphabet of size {w}", a.0)));
    }
    let mask = s.iter().fold(0u32, |m, a| m | (1 << a.0));
    Ok((0..1u32 << w).filter(|q| q & mask != 0).collect())
}

/// Output of [`reduce_to_setcover`].
#[derive(Clone, Debug)]
pub struct SetCoverReduction {
    pub system: SetSystem,
    /// `index[v][α]` is the set id of `S_{v,α}`.
    pub index: Vec<Vec<usize>>,
    /// Rank of each vertex in the order used.
    pub rank: Vec<usize>,
    alphabet_size: usize,
}

/// Per-vertex label lists and the extracted assignment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodedCover {
    pub labels: Vec<Vec<Symbol>>,
    pub assignment: Assignment,
}

fn ranks_from_order(n: usize, order: Option<&[usize]>) -> Result<Vec<usize>> {
    let Some(order) = order else {
        return Ok((0..n).collect());
    };
    if order.len() != n {
        return Err(Error::validation(format!("order lists {} vertices, expected {n}", order.len())));
    }
    let mut rank = vec![usize::MAX; n];
    for (i, &v) in order.iter().enumerate() {
        if v >= n {
            return Err(Error::validation(format!("order references unknown vertex {v}")));
        }
        if rank[v] != usize::MAX {
            return Err(Error::validation(format!("order ties: vertex {v} appears twice")));
        }
        rank[v] = i;
    }
    Ok(rank)
}

/// Builds the set system over `E × {0,1}^Σ` with one set `S_{v,α}` per vertex and value.
///
/// For an edge, the endpoint earlier in `order` contributes `{e} × Q̄_α`; the later
/// endpoint with value `α` contributes `{e} × Q_S` with `S` the earlier-endpoint values
/// compatible with `α`. `order` defaults to vertex order.
pub fn reduce_to_setcover(g: &ConstraintGraph, order: Option<&[usize]>) -> Result<SetCoverReduction> {
    g.require_binary("the set-cover reduction")?;
    let w = g.alphabet().len();
    check_gadget(w)?;
    let n = g.num_vertices();
    let rank = ranks_from_order(n, order)?;
    let block = 1usize << w;
    let m = g.num_edges();
    let mut members: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); w]; n];
    for (ei, e) in g.edges().iter().enumerate() {
        let (a, b) = (e.members[0], e.members[1]);
        if a == b {
            return Err(Error::validation(format!("edge {ei} is a self-loop; the set-cover reduction needs v ≠ w")));
        }
        let (early, late, early_first) = if rank[a] < rank[b] { (a, b, true) } else { (b, a, false) };
        let base = ei * block;
        for alpha in 0..w as u32 {
            for q in q_bar(Symbol(alpha), w)? {
                members[early][alpha as usize].push(base + q as usize);
            }
        }
        for beta in 0..w as u32 {
            let compatible: Vec<Symbol> = (0..w as u32)
                .map(Symbol)
                .filter(|&alpha| {
                    let tuple = if early_first { [alpha, Symbol(beta)] } else { [Symbol(beta), alpha] };
                    e.constraint.allows(&tuple)
                })
                .collect();
            for q in q_set(&compatible, w)? {
                members[late][beta as usize].push(base + q as usize);
            }
        }
    }
    let universe: Vec<String> = (0..m)
        .flat_map(|e| (0..block).map(move |q| format!("e{e}:{q:0width$b}", width = w)))
        .collect();
    let mut family = Vec::with_capacity(n * w);
    let mut index = vec![vec![0; w]; n];
    for (v, per_value) in members.into_iter().enumerate() {
        for (alpha, elems) in per_value.into_iter().enumerate() {
            index[v][alpha] = family.len();
            let id = format!("S_{}_{}", g.vertices()[v], g.alphabet().token(Symbol(alpha as u32)));
            family.push((id, elems));
        }
    }
    let system = SetSystem::new(universe, family)?;
    Ok(SetCoverReduction { system, index, rank, alphabet_size: w })
}

impl SetCoverReduction {
    pub fn set_of(&self, v: usize, alpha: Symbol) -> usize {
        self.index[v][alpha.index()]
    }

    /// `{S_{v,ψ(v)}}`; errors when that family is not a cover (ψ violates an edge).
    pub fn cover_of_assignment(&self, psi: &Assignment) -> Result<Cover> {
        if psi.len() != self.index.len() || psi.values().iter().any(|s| s.index() >= self.alphabet_size) {
            return Err(Error::validation("assignment does not match the reduced graph"));
        }
        let c = Cover::new((0..psi.len()).map(|v| self.set_of(v, psi[v])));
        self.system
            .require_cover(&c, "assignment cover")
            .map_err(|e| Error::Validation(format!("{e}; the assignment does not satisfy the graph")))?;
        Ok(c)
    }

    /// Label lists `L_v = {α : S_{v,α} ∈ C}` and the assignment taking the unique label
    /// where `|L_v| = 1` and the first alphabet symbol elsewhere.
    pub fn decode_cover(&self, c: &Cover) -> Result<DecodedCover> {
        self.system.require_cover(c, "cover")?;
        let mut owner = vec![(0usize, Symbol(0)); self.system.num_sets()];
        for (v, row) in self.index.iter().enumerate() {
            for (alpha, &s) in row.iter().enumerate() {
                owner[s] = (v, Symbol(alpha as u32));
            }
        }
        let mut labels = vec![Vec::new(); self.index.len()];
        for &s in &c.0 {
            let (v, alpha) = owner[s];
            labels[v].push(alpha);
        }
        for l in &mut labels {
            l.sort_unstable();
        }
        let assignment =
            Assignment::new(labels.iter().map(|l| if l.len() == 1 { l[0] } else { Symbol(0) }).collect());
        Ok(DecodedCover { labels, assignment })
    }

    /// Chains the three-step cover bridge along a reconfiguration path of satisfying
    /// assignments.
    pub fn cover_path(&self, path: &[Assignment]) -> Result<CoverSequence> {
        let first = path.first().ok_or_else(|| Error::validation("empty assignment path"))?;
        let mut seq = CoverSequence(vec![self.cover_of_assignment(first)?]);
        for pair in path.windows(2) {
            let a = self.cover_of_assignment(&pair[0])?;
            let b = self.cover_of_assignment(&pair[1])?;
            if a == b {
                continue;
            }
            seq.extend_with(cover_completeness_sequence(&self.system, &a, &b)?);
        }
        Ok(seq)
    }
}

/// `(C_ini, C_ini ∪ C_tar, C_tar)` for covers whose union has one extra set.
pub fn cover_completeness_sequence(sys: &SetSystem, ini: &Cover, tar: &Cover) -> Result<CoverSequence> {
    sys.require_cover(ini, "initial cover")?;
    sys.require_cover(tar, "target cover")?;
    let union = ini.union(tar);
    if union.len() != ini.len() + 1 {
        return Err(Error::validation(format!(
            "|C_ini ∪ C_tar| = {} but |C_ini| + 1 = {}",
            union.len(),
            ini.len() + 1
        )));
    }
    Ok(CoverSequence(vec![ini.clone(), union, tar.clone()]))
}

/// Adds the sets of `tar \ ini` one at a time, then removes `ini \ tar`.
pub fn trivial_two_approx(sys: &SetSystem, ini: &Cover, tar: &Cover) -> Result<CoverSequence> {
    sys.require_cover(ini, "initial cover")?;
    sys.require_cover(tar, "target cover")?;
    let mut cur = ini.clone();
    let mut steps = vec![cur.clone()];
    for &s in tar.0.difference(&ini.0) {
        cur.0.insert(s);
        steps.push(cur.clone());
    }
    for &s in ini.0.difference(&tar.0) {
        cur.0.remove(&s);
        steps.push(cur.clone());
    }
    Ok(CoverSequence(steps))
}

/// Split graph on `F ∪ U`: a clique on the sets plus set-element membership edges.
///
/// Vertices `0..|F|` are the sets, `|F|..|F|+|U|` the elements.
#[derive(Clone, Debug)]
pub struct SplitGraphInstance {
    pub system: SetSystem,
    pub num_sets: usize,
    pub num_vertices: usize,
    /// Closed neighbourhoods.
    pub closed: Vec<FixedBitSet>,
    pub initial: BTreeSet<usize>,
    pub target: BTreeSet<usize>,
    /// Set chosen to represent each element when decoding.
    pub representative: Vec<usize>,
}

pub fn reduce_to_domset(sys: &SetSystem, ini: &Cover, tar: &Cover) -> Result<SplitGraphInstance> {
    sys.require_cover(ini, "initial cover")?;
    sys.require_cover(tar, "target cover")?;
    let inc = sys.incidence();
    if let Some(e) = inc.iter().position(Vec::is_empty) {
        return Err(Error::validation(format!("element {:?} belongs to no set", sys.universe()[e])));
    }
    let m = sys.num_sets();
    let total = m + sys.universe_len();
    let mut closed = vec![FixedBitSet::with_capacity(total); total];
    for (s, nb) in closed.iter_mut().enumerate().take(m) {
        nb.insert_range(0..m);
        for e in sys.set(s).ones() {
            nb.insert(m + e);
        }
    }
    for (e, sets) in inc.iter().enumerate() {
        let nb = &mut closed[m + e];
        nb.insert(m + e);
        for &s in sets {
            nb.insert(s);
        }
    }
    Ok(SplitGraphInstance {
        system: sys.clone(),
        num_sets: m,
        num_vertices: total,
        closed,
        initial: ini.0.clone(),
        target: tar.0.clone(),
        representative: inc.iter().map(|s| s[0]).collect(),
    })
}

impl SplitGraphInstance {
    pub fn is_dominating(&self, d: &BTreeSet<usize>) -> bool {
        let mut seen = FixedBitSet::with_capacity(self.num_vertices);
        for &v in d {
            if v >= self.num_vertices {
                return false;
            }
            seen.union_with(&self.closed[v]);
        }
        seen.count_ones(..) == self.num_vertices
    }

    /// Sets in `D` plus the representative set of every element in `D`.
    pub fn domset_to_cover(&self, d: &BTreeSet<usize>) -> Result<Cover> {
        if !self.is_dominating(d) {
            return Err(Error::validation("not a dominating set"));
        }
        let c = Cover::new(
            d.iter().map(|&v| if v < self.num_sets { v } else { self.representative[v - self.num_sets] }),
        );
        self.system.require_cover(&c, "decoded cover")?;
        Ok(c)
    }

    /// Decodes a dominating-set sequence (one vertex added or removed per step).
    pub fn decode_sequence(&self, seq: &[BTreeSet<usize>]) -> Result<CoverSequence> {
        let mut out = Vec::with_capacity(seq.len());
        for (i, d) in seq.iter().enumerate() {
            if i > 0 && seq[i - 1].symmetric_difference(d).count() > 1 {
                return Err(Error::validation(format!("dominating-set step {i} changes more than one vertex")));
            }
            out.push(self.domset_to_cover(d)?);
        }
        CoverSequence::new(out)
    }

    /// Size of a minimum dominating set, by exhaustive search in increasing size.
    /// Gives up with a capacity error after `cap` candidate sets.
    pub fn domination_number(&self, cap: u64) -> Result<usize> {
        let n = self.num_vertices;
        let mut budget = cap;
        for k in 0..=n {
            let mut chosen = Vec::with_capacity(k);
            if self.search_dominating(0, k, &mut chosen, &mut budget)? {
                return Ok(k);
            }
        }
        unreachable!("the full vertex set dominates")
    }

    fn search_dominating(&self, from: usize, k: usize, chosen: &mut Vec<usize>, budget: &mut u64) -> Result<bool> {
        if chosen.len() == k {
            if *budget == 0 {
                return Err(Error::capacity("dominating-set search exceeded its cap"));
            }
            *budget -= 1;
            return Ok(self.is_dominating(&chosen.iter().copied().collect()));
        }
        for v in from..self.num_vertices {
            if self.num_vertices - v < k - chosen.len() {
                break;
            }
            chosen.push(v);
            let found = self.search_dominating(v + 1, k, chosen, budget)?;
            chosen.pop();
            if found {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

/// `ε² · d/(d+λ) · (1 − 3λ/(εd))`, requiring `λ/d ≤ ε/3`.
pub fn sc_soundness_epsilon(eps: &BigRational, d: &BigRational, lambda: &BigRational) -> Result<BigRational> {
    let zero = BigRational::zero();
    let one = ratio(1, 1);
    if *eps <= zero || *eps >= one {
        return Err(Error::Domain(format!("ε must lie in (0, 1), got {}", to_f64(eps))));
    }
    if *d <= zero || *lambda < zero {
        return Err(Error::Domain("need d > 0 and λ ≥ 0".into()));
    }
    let three = ratio(3, 1);
    if lambda / d > eps / &three {
        return Err(Error::Domain("λ/d must be at most ε/3".into()));
    }
    Ok(eps * eps * d / (d + lambda) * (one - three * lambda / (eps * d)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::cycle_neq;
    use crate::rational::parse_ratio;

    #[test]
    fn gadget_sizes() {
        for w in 1..=6 {
            for a in 0..w as u32 {
                assert_eq!(q_bar(Symbol(a), w).unwrap().len(), 1 << (w - 1));
            }
            assert!(q_set(&[], w).unwrap().is_empty());
            let all: Vec<Symbol> = (0..w as u32).map(Symbol).collect();
            assert_eq!(q_set(&all, w).unwrap(), (1..1u32 << w).collect::<Vec<_>>());
        }
        assert!(matches!(q_bar(Symbol(0), 13), Err(Error::Capacity(_))));
    }

    #[test]
    fn c4_reduction_shape() {
        let g = cycle_neq(4, 2);
        let red = reduce_to_setcover(&g, None).unwrap();
        assert_eq!(red.system.universe_len(), 4 * 4);
        assert_eq!(red.system.num_sets(), 8);
        assert_eq!(red.system.set_id(red.set_of(2, Symbol(1))), "S_2_1");
        let c = red.cover_of_assignment(&Assignment::from_indices(&[0, 1, 0, 1])).unwrap();
        assert_eq!(c.len(), 4);
        let dec = red.decode_cover(&c).unwrap();
        assert_eq!(dec.assignment, Assignment::from_indices(&[0, 1, 0, 1]));
        assert!(red.cover_of_assignment(&Assignment::from_indices(&[0, 0, 1, 1])).is_err());
    }

    #[test]
    fn order_ties_rejected() {
        let g = cycle_neq(4, 2);
        assert!(reduce_to_setcover(&g, Some(&[0, 1, 1, 3])).is_err());
        assert!(reduce_to_setcover(&g, Some(&[3, 2, 1, 0])).is_ok());
    }

    #[test]
    fn bridging_sequences() {
        let sys = SetSystem::from_labels(
            vec!["a".into(), "b".into()],
            vec![("X".into(), vec!["a".into(), "b".into()]), ("Y".into(), vec!["a".into(), "b".into()])],
        )
        .unwrap();
        let seq = cover_completeness_sequence(&sys, &Cover::new([0]), &Cover::new([1])).unwrap();
        assert_eq!(seq.len(), 3);
        assert_eq!(sequence_cost(&sys, &seq, 1).unwrap(), ratio(1, 1));
        let two = trivial_two_approx(&sys, &Cover::new([0]), &Cover::new([1])).unwrap();
        assert_eq!(two, seq);
        assert!(cover_completeness_sequence(&sys, &Cover::new([0]), &Cover::new([0])).is_err());
    }

    #[test]
    fn corollary_numbers() {
        let eps = parse_ratio("0.9971").unwrap();
        let lambda = parse_ratio("1/10000000000").unwrap();
        let e = sc_soundness_epsilon(&eps, &ratio(1, 1), &lambda).unwrap();
        assert!(e > parse_ratio("0.9942").unwrap());
        assert_eq!(ratio(2, 1) - &eps, parse_ratio("1.0029").unwrap());
        assert!(sc_soundness_epsilon(&eps, &ratio(1, 1), &ratio(1, 2)).is_err());
        assert_eq!(sc_soundness_epsilon(&ratio(1, 2), &ratio(4, 1), &ratio(0, 1)).unwrap(), ratio(1, 4));
    }

    #[test]
    fn domset_decode_never_grows() {
        let sys = SetSystem::new(
            (0..3).map(|i| i.to_string()).collect(),
            vec![("A".into(), vec![0, 1]), ("B".into(), vec![1, 2]), ("C".into(), vec![2])],
        )
        .unwrap();
        let inst = reduce_to_domset(&sys, &Cover::new([0, 1]), &Cover::new([0, 2])).unwrap();
        assert!(inst.is_dominating(&inst.initial));
        let d: BTreeSet<usize> = [0, 5].into_iter().collect();
        assert!(inst.is_dominating(&d));
        let c = inst.domset_to_cover(&d).unwrap();
        assert!(c.len() <= d.len());
        assert_eq!(inst.domination_number(1 << 20).unwrap(), 2);
    }
}
