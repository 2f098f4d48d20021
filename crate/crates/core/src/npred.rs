//! Reductions from ordinary constraint satisfaction into reconfiguration: a binary
//! instance becomes a 4-ary reconfiguration instance, and a `q`-ary reconfiguration
//! instance collapses to a binary one over tuples of squared symbols.

use std::sync::Arc;

use crate::amplify::squared::{SqSymbol, SquaredAlphabet};
use crate::csp::{Alphabet, Assignment, Constraint, ConstraintGraph, Edge, ReconfigurationSequence, Symbol};
use crate::error::{Error, Result};

/// Largest output alphabet `qcspr_to_2cspr` builds by default.
pub const DEFAULT_TUPLE_ALPHABET_CAP: u64 = 100_000;

/// Largest base alphabet for which 4-ary constraints are stored as tables.
const TABLE_ALPHABET_LIMIT: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VertexOrigin {
    Source(usize),
    /// A vertex added by the reduction, named by its role.
    Fresh(&'static str),
    /// The vertex standing for a source hyperedge.
    Hyperedge(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EdgeOrigin {
    pub source_edge: usize,
    /// Member position inside the source hyperedge, for the binary collapse.
    pub position: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct LiftedInstance {
    pub graph: ConstraintGraph,
    pub ini: Assignment,
    pub tar: Assignment,
    pub vertex_origin: Vec<VertexOrigin>,
    pub edge_origin: Vec<EdgeOrigin>,
}

fn fresh_name(taken: &[String], base: &str) -> String {
    let mut name = base.to_string();
    while taken.iter().any(|t| *t == name) {
        name.push('\'');
    }
    name
}

fn endpoints(g: &ConstraintGraph, a: Option<Symbol>, b: Option<Symbol>) -> Result<(Symbol, Symbol)> {
    let w = g.alphabet().len();
    if w < 2 {
        return Err(Error::validation("the alphabet needs at least two symbols"));
    }
    let a = a.unwrap_or(Symbol(0));
    let b = b.unwrap_or(Symbol(1));
    if !g.alphabet().contains(a) || !g.alphabet().contains(b) {
        return Err(Error::validation("endpoint symbols must belong to the alphabet"));
    }
    if a == b {
        return Err(Error::validation("endpoint symbols must differ"));
    }
    Ok((a, b))
}

/// Each edge `(v, w)` becomes `(v, w, x, y)` over two fresh vertices, allowed when
/// `(α_v, α_w)` is allowed or `x` and `y` agree. The endpoints are all-`a` and all-`b`
/// (first and second symbol by default).
pub fn csp_to_4cspr(g: &ConstraintGraph, a: Option<Symbol>, b: Option<Symbol>) -> Result<LiftedInstance> {
    g.require_binary("the 4-ary lift")?;
    let (a, b) = endpoints(g, a, b)?;
    let n = g.num_vertices();
    let w = g.alphabet().len();
    let mut names = g.vertices().to_vec();
    let x_name = fresh_name(&names, "x");
    names.push(x_name);
    let y_name = fresh_name(&names, "y");
    names.push(y_name);
    let (x, y) = (n, n + 1);

    let edges = g
        .edges()
        .iter()
        .map(|e| {
            let members = vec![e.members[0], e.members[1], x, y];
            let constraint = match &e.constraint {
                Constraint::Any => Constraint::Any,
                c if w <= TABLE_ALPHABET_LIMIT => {
                    let mut tuples = Vec::new();
                    for t in 0..w.pow(4) {
                        let d: Vec<Symbol> = (0..4).map(|i| Symbol((t / w.pow(3 - i)) as u32 % w as u32)).collect();
                        if d[2] == d[3] || c.allows(&d[..2]) {
                            tuples.push(d);
                        }
                    }
                    Constraint::table(tuples)
                }
                c => {
                    let c = c.clone();
                    Constraint::predicate(move |t| t[2] == t[3] || c.allows(&t[..2]))
                }
            };
            Edge::new(members, constraint)
        })
        .collect();
    let graph = ConstraintGraph::new(4, names, g.alphabet().clone(), edges)?;
    let vertex_origin = (0..n)
        .map(VertexOrigin::Source)
        .chain([VertexOrigin::Fresh("x"), VertexOrigin::Fresh("y")])
        .collect();
    let edge_origin = (0..g.num_edges()).map(|e| EdgeOrigin { source_edge: e, position: None }).collect();
    Ok(LiftedInstance {
        graph,
        ini: Assignment::uniform(n + 2, a),
        tar: Assignment::uniform(n + 2, b),
        vertex_origin,
        edge_origin,
    })
}

/// Reconfiguration of the 4-ary lift from all-`a` to all-`b` through a satisfying
/// `psi`: move every source vertex to `psi`, flip `x`, flip `y`, then move every source
/// vertex to `b`. Has `2|V| + 3` assignments (unchanged vertices still take a step).
pub fn completeness_witness_4cspr(
    g: &ConstraintGraph,
    psi: &Assignment,
    a: Option<Symbol>,
    b: Option<Symbol>,
) -> Result<ReconfigurationSequence> {
    g.require_binary("the 4-ary lift")?;
    let (a, b) = endpoints(g, a, b)?;
    psi.validate(g)?;
    if !g.is_satisfying(psi) {
        return Err(Error::validation("the witness assignment does not satisfy the instance"));
    }
    let n = g.num_vertices();
    let mut cur = Assignment::uniform(n + 2, a);
    let mut steps = vec![cur.clone()];
    for v in 0..n {
        cur.set(v, psi[v]);
        steps.push(cur.clone());
    }
    for fresh in [n, n + 1] {
        cur.set(fresh, b);
        steps.push(cur.clone());
    }
    for v in 0..n {
        cur.set(v, b);
        steps.push(cur.clone());
    }
    ReconfigurationSequence::new(steps)
}

/// The binary collapse's alphabet: `q`-tuples of squared symbols, coordinate 0 least
/// significant in the symbol index.
#[derive(Clone, Debug)]
pub struct TupleAlphabet {
    squared: SquaredAlphabet,
    q: usize,
}

impl TupleAlphabet {
    pub fn new(base: &Alphabet, q: usize, cap: u64) -> Result<Self> {
        let squared = SquaredAlphabet::new(base);
        let m = squared.len() as u64;
        match m.checked_pow(q as u32) {
            Some(size) if size <= cap => Ok(TupleAlphabet { squared, q }),
            _ => Err(Error::capacity(format!(
                "tuple alphabet of size {m}^{q} exceeds the cap {cap}"
            ))),
        }
    }

    pub fn squared(&self) -> &SquaredAlphabet {
        &self.squared
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn len(&self) -> usize {
        self.squared.len().pow(self.q as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn encode(&self, coords: &[SqSymbol]) -> Result<Symbol> {
        let m = self.squared.len();
        let mut idx = 0usize;
        for c in coords.iter().rev() {
            idx = idx * m + self.squared.index_of(*c)?;
        }
        Ok(Symbol(idx as u32))
    }

    pub fn decode(&self, s: Symbol) -> Vec<SqSymbol> {
        decode_with(self.squared.symbols(), self.q, s)
    }

    pub fn alphabet(&self) -> Alphabet {
        let tokens: Vec<String> = (0..self.len())
            .map(|i| {
                self.decode(Symbol(i as u32)).iter().map(|c| self.squared.token(*c)).collect::<Vec<_>>().join("|")
            })
            .collect();
        Alphabet::new(tokens).expect("tuple tokens are distinct")
    }
}

fn decode_with(table: &[SqSymbol], q: usize, s: Symbol) -> Vec<SqSymbol> {
    let m = table.len();
    let mut rest = s.index();
    (0..q)
        .map(|_| {
            let c = table[rest % m];
            rest /= m;
            c
        })
        .collect()
}

/// Every tuple of the product of the coordinate sets lies in the relation.
fn product_allowed(c: &Constraint, coords: &[SqSymbol]) -> bool {
    let mut tuple: Vec<Symbol> = coords.iter().map(|s| s.lo()).collect();
    let q = coords.len();
    for mask in 0u32..(1 << q) {
        let mut skip = false;
        for (j, s) in coords.iter().enumerate() {
            let high = mask >> j & 1 == 1;
            if high && s.is_single() {
                skip = true;
                break;
            }
            tuple[j] = if high { s.hi() } else { s.lo() };
        }
        if !skip && !c.allows(&tuple) {
            return false;
        }
    }
    true
}

/// A `q`-ary instance with satisfying endpoints becomes a bipartite binary instance on
/// `V ∪ E`. A vertex's value is read from its first coordinate, the rest being fixed to
/// the first symbol; the edge `(v_i, e)` requires `α_v[0] ⊆ α_e[i]` and the product of
/// `α_e`'s coordinates inside `e`'s relation.
pub fn qcspr_to_2cspr(g: &ConstraintGraph, ini: &Assignment, tar: &Assignment, cap: u64) -> Result<LiftedInstance> {
    let q = g.arity();
    if q < 3 {
        return Err(Error::validation("the binary collapse expects arity at least 3"));
    }
    for (name, psi) in [("initial", ini), ("target", tar)] {
        psi.validate(g)?;
        if !g.is_satisfying(psi) {
            return Err(Error::validation(format!("the {name} assignment does not satisfy the instance")));
        }
    }
    let tuples = TupleAlphabet::new(g.alphabet(), q, cap)?;
    let table: Arc<[SqSymbol]> = tuples.squared().symbols().into();
    let n = g.num_vertices();

    let mut names = g.vertices().to_vec();
    for e in 0..g.num_edges() {
        let name = fresh_name(&names, &format!("e{e}"));
        names.push(name);
    }
    let mut edges = Vec::with_capacity(q * g.num_edges());
    let mut edge_origin = Vec::with_capacity(q * g.num_edges());
    for (ei, e) in g.edges().iter().enumerate() {
        for (i, &v) in e.members.iter().enumerate() {
            let table = table.clone();
            let relation = e.constraint.clone();
            let constraint = Constraint::predicate(move |t| {
                let vertex_value = decode_with(&table, 1, t[0])[0];
                let edge_value = decode_with(&table, q, t[1]);
                vertex_value.is_subset(edge_value[i]) && product_allowed(&relation, &edge_value)
            });
            edges.push(Edge::new(vec![v, n + ei], constraint));
            edge_origin.push(EdgeOrigin { source_edge: ei, position: Some(i) });
        }
    }
    let graph = ConstraintGraph::new(2, names, tuples.alphabet(), edges)?;
    let vertex_origin = (0..n).map(VertexOrigin::Source).chain((0..g.num_edges()).map(VertexOrigin::Hyperedge)).collect();
    Ok(LiftedInstance {
        ini: lift_to_tuples(g, &tuples, ini)?,
        tar: lift_to_tuples(g, &tuples, tar)?,
        graph,
        vertex_origin,
        edge_origin,
    })
}

fn vertex_symbol(tuples: &TupleAlphabet, s: SqSymbol) -> Result<Symbol> {
    let mut coords = vec![SqSymbol::single(Symbol(0)); tuples.q()];
    coords[0] = s;
    tuples.encode(&coords)
}

/// The collapsed image of a source assignment: singletons everywhere.
pub fn lift_to_tuples(g: &ConstraintGraph, tuples: &TupleAlphabet, psi: &Assignment) -> Result<Assignment> {
    let mut values = Vec::with_capacity(g.num_vertices() + g.num_edges());
    for v in 0..g.num_vertices() {
        values.push(vertex_symbol(tuples, SqSymbol::single(psi[v]))?);
    }
    for e in g.edges() {
        let coords: Vec<SqSymbol> = e.members.iter().map(|&m| SqSymbol::single(psi[m])).collect();
        values.push(tuples.encode(&coords)?);
    }
    Ok(Assignment::new(values))
}

/// Reads each source vertex's value off the lower end of its first coordinate.
pub fn project_from_tuples(g: &ConstraintGraph, tuples: &TupleAlphabet, lifted: &Assignment) -> Assignment {
    Assignment::new((0..g.num_vertices()).map(|v| tuples.decode(lifted[v])[0].lo()).collect())
}

/// Carries a source sequence to the binary collapse. For each change of `v` from `α`
/// to `β`, every edge containing `v` first widens that coordinate to `{α, β}`, then `v`
/// moves, then the edges narrow to `{β}`. If every source assignment satisfies the
/// instance then so does every lifted one. Edges listing a vertex twice are rejected.
pub fn collapse_witness(g: &ConstraintGraph, seq: &ReconfigurationSequence, cap: u64) -> Result<ReconfigurationSequence> {
    let q = g.arity();
    let tuples = TupleAlphabet::new(g.alphabet(), q, cap)?;
    let n = g.num_vertices();
    let mut incident: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (ei, e) in g.edges().iter().enumerate() {
        for (i, &v) in e.members.iter().enumerate() {
            if incident[v].iter().any(|&(f, _)| f == ei) {
                return Err(Error::Unsupported(format!("edge {ei} lists vertex {v} more than once")));
            }
            incident[v].push((ei, i));
        }
    }
    let mut cur = lift_to_tuples(g, &tuples, seq.first())?;
    let mut out = vec![cur.clone()];
    for pair in seq.steps().windows(2) {
        let changed = pair[0].differing_vertices(&pair[1]);
        if changed.len() > 1 {
            return Err(Error::validation("the source sequence changes several vertices at once"));
        }
        let Some(&v) = changed.first() else { continue };
        let (alpha, beta) = (pair[0][v], pair[1][v]);
        let set_coord = |cur: &mut Assignment, ei: usize, i: usize, s: SqSymbol| -> Result<()> {
            let mut coords = tuples.decode(cur[n + ei]);
            coords[i] = s;
            cur.set(n + ei, tuples.encode(&coords)?);
            Ok(())
        };
        for &(ei, i) in &incident[v] {
            set_coord(&mut cur, ei, i, SqSymbol::pair(alpha, beta))?;
            out.push(cur.clone());
        }
        cur.set(v, vertex_symbol(&tuples, SqSymbol::single(beta))?);
        out.push(cur.clone());
        for &(ei, i) in &incident[v] {
            set_coord(&mut cur, ei, i, SqSymbol::single(beta))?;
            out.push(cur.clone());
        }
    }
    ReconfigurationSequence::new(out)
}
