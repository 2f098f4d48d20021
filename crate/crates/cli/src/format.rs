//! JSON instance files.
//!
//! Every document carries a `"kind"` tag. Unknown fields are rejected, rationals are
//! `"p/q"` strings, and writing is canonical: pretty-printed with a trailing newline and
//! a fixed field order, so `write(read(f)) == f` for files this module produced.

use std::collections::BTreeSet;

use reconf_core::amplify::{Proof, SquaredAlphabet};
use reconf_core::covering::{Cover, CoverSequence, SetSystem};
use reconf_core::spectral::SimpleMultigraph;
use reconf_core::{
    Alphabet, Assignment, Constraint, ConstraintGraph, Edge, Error, ReconfigurationSequence, Result, Symbol,
};
use serde::{Deserialize, Serialize};

/// Largest tuple count a predicate edge is expanded to when written.
pub const MATERIALIZE_CAP: u64 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Document {
    Csp(CspDoc),
    Assignment(AssignmentDoc),
    Sequence(SequenceDoc),
    Setsystem(SetSystemDoc),
    Cover(CoverDoc),
    Coverseq(CoverSeqDoc),
    Graph(GraphDoc),
    Proof(ProofDoc),
    Report(ReportDoc),
}

impl Document {
    pub fn kind(&self) -> &'static str {
        match self {
            Document::Csp(_) => "csp",
            Document::Assignment(_) => "assignment",
            Document::Sequence(_) => "sequence",
            Document::Setsystem(_) => "setsystem",
            Document::Cover(_) => "cover",
            Document::Coverseq(_) => "coverseq",
            Document::Graph(_) => "graph",
            Document::Proof(_) => "proof",
            Document::Report(_) => "report",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CspDoc {
    pub q: usize,
    pub alphabet: Vec<String>,
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDoc {
    pub members: Vec<String>,
    pub allowed: AllowedDoc,
}

/// `"any"`, a list of tuples, or the `"predicate"` marker (readable only as an error).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AllowedDoc {
    Keyword(String),
    Tuples(Vec<Vec<String>>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssignmentDoc {
    pub values: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceDoc {
    pub steps: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetSystemDoc {
    pub universe: Vec<String>,
    pub sets: Vec<SetDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetDoc {
    pub id: String,
    pub elements: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverDoc {
    pub sets: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverSeqDoc {
    pub steps: Vec<Vec<String>>,
}

/// Undirected multigraph; `[v, v]` is a self-loop.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDoc {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
}

/// Opinions as `[holder, about, squared token]` triples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProofDoc {
    pub radius: usize,
    pub opinions: Vec<[String; 3]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportDoc {
    pub command: String,
    pub fields: serde_json::Map<String, serde_json::Value>,
}

pub fn parse(text: &str) -> Result<Document> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::Validation(format!("malformed JSON: {e}")))?;
    let kind = value
        .get("kind")
        .and_then(|k| k.as_str())
        .ok_or_else(|| Error::Validation("document has no string \"kind\" field".into()))?
        .to_string();
    serde_json::from_str(text).map_err(|e| Error::Validation(format!("invalid {kind} document: {}", locate(text, &e))))
}

/// Tagged documents are buffered before decoding, so serde reports no position. Point at
/// the first occurrence of the offending field instead.
fn locate(text: &str, e: &serde_json::Error) -> String {
    let msg = e.to_string();
    if e.line() > 0 {
        return msg;
    }
    let field = msg.split('`').nth(1).filter(|_| msg.contains("field"));
    let Some(at) = field.and_then(|f| text.find(&format!("\"{f}\""))) else { return msg };
    let line = text[..at].matches('\n').count() + 1;
    let column = at - text[..at].rfind('\n').map_or(0, |i| i + 1) + 1;
    format!("{msg} at line {line} column {column}")
}

pub fn serialize(doc: &Document) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("documents serialize");
    s.push('\n');
    s
}

pub fn read_file(path: &std::path::Path) -> Result<Document> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Validation(format!("cannot read {}: {e}", path.display())))?;
    parse(&text).map_err(|e| match e {
        Error::Validation(m) => Error::Validation(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn write_file(path: &std::path::Path, doc: &Document) -> Result<()> {
    std::fs::write(path, serialize(doc)).map_err(|e| Error::Validation(format!("cannot write {}: {e}", path.display())))
}

fn expect_kind<'a>(doc: &'a Document, kind: &str) -> Result<&'a Document> {
    if doc.kind() == kind {
        Ok(doc)
    } else {
        Err(Error::Validation(format!("expected a {kind} document, found {}", doc.kind())))
    }
}

/// A constraint graph with its optional embedded endpoints.
#[derive(Clone, Debug)]
pub struct Instance {
    pub graph: ConstraintGraph,
    pub initial: Option<Assignment>,
    pub target: Option<Assignment>,
}

fn symbol(alphabet: &Alphabet, token: &str) -> Result<Symbol> {
    alphabet.symbol(token).ok_or_else(|| Error::Validation(format!("unknown symbol {token:?}")))
}

fn assignment_from_tokens(g: &ConstraintGraph, tokens: &[String]) -> Result<Assignment> {
    if tokens.len() != g.num_vertices() {
        return Err(Error::Validation(format!(
            "assignment has {} values for {} vertices",
            tokens.len(),
            g.num_vertices()
        )));
    }
    Ok(Assignment::new(tokens.iter().map(|t| symbol(g.alphabet(), t)).collect::<Result<_>>()?))
}

fn tokens_of(g: &ConstraintGraph, psi: &Assignment) -> Vec<String> {
    psi.values().iter().map(|&s| g.alphabet().token(s).to_string()).collect()
}

impl CspDoc {
    pub fn to_instance(&self) -> Result<Instance> {
        let alphabet = Alphabet::new(self.alphabet.clone())?;
        let index = |name: &str| {
            self.vertices
                .iter()
                .position(|v| v == name)
                .ok_or_else(|| Error::Validation(format!("unknown vertex {name:?}")))
        };
        let mut edges = Vec::with_capacity(self.edges.len());
        for (i, e) in self.edges.iter().enumerate() {
            let members = e.members.iter().map(|m| index(m)).collect::<Result<Vec<_>>>()?;
            let constraint = match &e.allowed {
                AllowedDoc::Keyword(k) if k == "any" => Constraint::Any,
                AllowedDoc::Keyword(k) if k == "predicate" => {
                    return Err(Error::Unsupported(format!("edge {i} is a predicate edge and has no table")))
                }
                AllowedDoc::Keyword(k) => {
                    return Err(Error::Validation(format!("edge {i}: allowed must be \"any\" or a tuple list, got {k:?}")))
                }
                AllowedDoc::Tuples(ts) => {
                    let mut set = BTreeSet::new();
                    for t in ts {
                        let tuple = t.iter().map(|s| symbol(&alphabet, s)).collect::<Result<Vec<_>>>()?;
                        set.insert(tuple);
                    }
                    Constraint::Table(set)
                }
            };
            edges.push(Edge::new(members, constraint));
        }
        let graph = ConstraintGraph::new(self.q, self.vertices.clone(), alphabet, edges)?;
        let initial = self.initial.as_deref().map(|t| assignment_from_tokens(&graph, t)).transpose()?;
        let target = self.target.as_deref().map(|t| assignment_from_tokens(&graph, t)).transpose()?;
        Ok(Instance { graph, initial, target })
    }
}

fn materialize(g: &ConstraintGraph, i: usize, c: &Constraint) -> Result<Vec<Vec<String>>> {
    let w = g.alphabet().len() as u64;
    let q = g.arity() as u32;
    let total = w.checked_pow(q).filter(|&t| t <= MATERIALIZE_CAP).ok_or_else(|| {
        Error::Unsupported(format!("edge {i} is a predicate over {w}^{q} tuples and cannot be written"))
    })?;
    let mut out = Vec::new();
    let mut tuple = vec![Symbol(0); q as usize];
    for code in 0..total {
        let mut rest = code;
        for slot in tuple.iter_mut().rev() {
            *slot = Symbol((rest % w) as u32);
            rest /= w;
        }
        if c.allows(&tuple) {
            out.push(tuple.iter().map(|&s| g.alphabet().token(s).to_string()).collect());
        }
    }
    Ok(out)
}

pub fn csp_doc(g: &ConstraintGraph, initial: Option<&Assignment>, target: Option<&Assignment>) -> Result<CspDoc> {
    let mut edges = Vec::with_capacity(g.num_edges());
    for (i, e) in g.edges().iter().enumerate() {
        let allowed = match &e.constraint {
            Constraint::Any => AllowedDoc::Keyword("any".into()),
            Constraint::Table(t) => AllowedDoc::Tuples(
                t.iter().map(|tuple| tuple.iter().map(|&s| g.alphabet().token(s).to_string()).collect()).collect(),
            ),
            c @ Constraint::Predicate(_) => AllowedDoc::Tuples(materialize(g, i, c)?),
        };
        edges.push(EdgeDoc { members: e.members.iter().map(|&m| g.vertices()[m].clone()).collect(), allowed });
    }
    Ok(CspDoc {
        q: g.arity(),
        alphabet: g.alphabet().tokens().to_vec(),
        vertices: g.vertices().to_vec(),
        edges,
        initial: initial.map(|a| tokens_of(g, a)),
        target: target.map(|a| tokens_of(g, a)),
    })
}

pub fn read_instance(path: &std::path::Path) -> Result<Instance> {
    match expect_kind(&read_file(path)?, "csp")? {
        Document::Csp(c) => c.to_instance(),
        _ => unreachable!(),
    }
}

pub fn read_assignment(path: &std::path::Path, g: &ConstraintGraph) -> Result<Assignment> {
    match expect_kind(&read_file(path)?, "assignment")? {
        Document::Assignment(a) => assignment_from_tokens(g, &a.values),
        _ => unreachable!(),
    }
}

pub fn assignment_doc(g: &ConstraintGraph, psi: &Assignment) -> Document {
    Document::Assignment(AssignmentDoc { values: tokens_of(g, psi) })
}

pub fn read_sequence(path: &std::path::Path, g: &ConstraintGraph) -> Result<ReconfigurationSequence> {
    match expect_kind(&read_file(path)?, "sequence")? {
        Document::Sequence(s) => {
            ReconfigurationSequence::new(s.steps.iter().map(|t| assignment_from_tokens(g, t)).collect::<Result<_>>()?)
        }
        _ => unreachable!(),
    }
}

pub fn sequence_doc(g: &ConstraintGraph, seq: &ReconfigurationSequence) -> Document {
    Document::Sequence(SequenceDoc { steps: seq.steps().iter().map(|a| tokens_of(g, a)).collect() })
}

/// A set system with its optional embedded endpoint covers.
#[derive(Clone, Debug)]
pub struct CoverInstance {
    pub system: SetSystem,
    pub initial: Option<Cover>,
    pub target: Option<Cover>,
}

fn cover_from_ids(sys: &SetSystem, ids: &[String]) -> Result<Cover> {
    let mut sets = BTreeSet::new();
    for id in ids {
        let i = sys.set_index(id).ok_or_else(|| Error::Validation(format!("unknown set {id:?}")))?;
        if !sets.insert(i) {
            return Err(Error::Validation(format!("set {id:?} listed twice")));
        }
    }
    Ok(Cover(sets))
}

fn ids_of(sys: &SetSystem, c: &Cover) -> Vec<String> {
    c.0.iter().map(|&i| sys.set_id(i).to_string()).collect()
}

pub fn read_set_system(path: &std::path::Path) -> Result<CoverInstance> {
    match expect_kind(&read_file(path)?, "setsystem")? {
        Document::Setsystem(d) => {
            let family = d.sets.iter().map(|s| (s.id.clone(), s.elements.clone())).collect();
            let system = SetSystem::from_labels(d.universe.clone(), family)?;
            let initial = d.initial.as_deref().map(|ids| cover_from_ids(&system, ids)).transpose()?;
            let target = d.target.as_deref().map(|ids| cover_from_ids(&system, ids)).transpose()?;
            Ok(CoverInstance { system, initial, target })
        }
        _ => unreachable!(),
    }
}

pub fn set_system_doc(sys: &SetSystem, initial: Option<&Cover>, target: Option<&Cover>) -> Document {
    Document::Setsystem(SetSystemDoc {
        universe: sys.universe().to_vec(),
        sets: (0..sys.num_sets())
            .map(|i| SetDoc {
                id: sys.set_id(i).to_string(),
                elements: sys.elements_of(i).into_iter().map(|e| sys.universe()[e].clone()).collect(),
            })
            .collect(),
        initial: initial.map(|c| ids_of(sys, c)),
        target: target.map(|c| ids_of(sys, c)),
    })
}

pub fn read_cover(path: &std::path::Path, sys: &SetSystem) -> Result<Cover> {
    match expect_kind(&read_file(path)?, "cover")? {
        Document::Cover(c) => cover_from_ids(sys, &c.sets),
        _ => unreachable!(),
    }
}

pub fn cover_doc(sys: &SetSystem, c: &Cover) -> Document {
    Document::Cover(CoverDoc { sets: ids_of(sys, c) })
}

pub fn read_cover_sequence(path: &std::path::Path, sys: &SetSystem) -> Result<CoverSequence> {
    match expect_kind(&read_file(path)?, "coverseq")? {
        Document::Coverseq(s) => CoverSequence::new(s.steps.iter().map(|ids| cover_from_ids(sys, ids)).collect::<Result<_>>()?),
        _ => unreachable!(),
    }
}

pub fn cover_sequence_doc(sys: &SetSystem, seq: &CoverSequence) -> Document {
    Document::Coverseq(CoverSeqDoc { steps: seq.steps().iter().map(|c| ids_of(sys, c)).collect() })
}

pub fn read_graph(path: &std::path::Path) -> Result<SimpleMultigraph> {
    match expect_kind(&read_file(path)?, "graph")? {
        Document::Graph(g) => {
            let edges: Vec<(usize, usize)> = g.edges.iter().map(|e| (e[0], e[1])).collect();
            SimpleMultigraph::from_edges(g.n, &edges)
        }
        _ => unreachable!(),
    }
}

pub fn graph_doc(g: &SimpleMultigraph) -> Document {
    Document::Graph(GraphDoc { n: g.n(), edges: g.edge_list().into_iter().map(|(u, v)| [u, v]).collect() })
}

pub fn read_proof(path: &std::path::Path, g: &ConstraintGraph) -> Result<Proof> {
    let Document::Proof(p) = expect_kind(&read_file(path)?, "proof")?.clone() else { unreachable!() };
    let squared = SquaredAlphabet::new(g.alphabet());
    let vertex = |name: &str| g.vertex_index(name).ok_or_else(|| Error::Validation(format!("unknown vertex {name:?}")));
    let mut opinions = vec![Vec::new(); g.num_vertices()];
    for [holder, about, token] in &p.opinions {
        let s = squared
            .symbols()
            .iter()
            .copied()
            .find(|&s| squared.token(s) == *token)
            .ok_or_else(|| Error::Validation(format!("unknown squared symbol {token:?}")))?;
        opinions[vertex(holder)?].push((vertex(about)?, s));
    }
    let proof = Proof::from_opinions(p.radius, opinions);
    for x in 0..g.num_vertices() {
        let mut about: Vec<usize> = proof.opinions_of(x).iter().map(|&(v, _)| v).collect();
        let n = about.len();
        about.dedup();
        if about.len() != n {
            return Err(Error::Validation(format!("vertex {:?} holds two opinions on one vertex", g.vertices()[x])));
        }
    }
    proof.validate_against(g)?;
    Ok(proof)
}

pub fn proof_doc(g: &ConstraintGraph, proof: &Proof) -> Document {
    let squared = SquaredAlphabet::new(g.alphabet());
    let mut opinions = Vec::new();
    for x in 0..proof.num_vertices() {
        for &(v, s) in proof.opinions_of(x) {
            opinions.push([g.vertices()[x].clone(), g.vertices()[v].clone(), squared.token(s)]);
        }
    }
    Document::Proof(ProofDoc { radius: proof.radius(), opinions })
}
