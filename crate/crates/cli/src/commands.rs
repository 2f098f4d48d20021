//! Subcommand definitions and their execution.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde_json::Value;

use reconf_core::amplify::{
    self, completeness_sequence, decode_proof_sequence, expanderize, lift_assignment, popularity_vote, power,
    power::{lambda_bound, DEFAULT_WALK_CAP},
    Proof, DEFAULT_EXPANDER_SLACK,
};
use reconf_core::covering::{
    reduce_to_domset, reduce_to_setcover, sc_soundness_epsilon, sequence_cost, trivial_two_approx,
    validate_cover_sequence, Cover, CoverSequence,
};
use reconf_core::npred::{
    collapse_witness, completeness_witness_4cspr, csp_to_4cspr, qcspr_to_2cspr, DEFAULT_TUPLE_ALPHABET_CAP,
};
use reconf_core::oracle::{
    self, maximin_reconf_value, min_cover_size, minmax_cover_cost, opt_assignment, DEFAULT_COVER_CAP,
    DEFAULT_STATE_CAP,
};
use reconf_core::rational::{format_decimal, format_ratio, parse_ratio};
use reconf_core::spectral::{make_expander, random_regular, second_eigenvalue, SimpleMultigraph, LAMBDA_TOLERANCE};
use reconf_core::verifier::{edge_mask, estimate_rejection, exact_truncated_stats, RNG_CONTRACT};
use reconf_core::{sequence_value, validate_sequence, Assignment, ConstraintGraph, Error, ReconfigurationSequence, Result};

use crate::format::{self, Document, ReportDoc};

pub const CAP_ENV: &str = "RECONF_FORGE_CAP";

#[derive(Parser, Debug)]
#[command(name = "reconf-forge", version, about = "Reconfiguration gap-amplification toolkit")]
pub struct Cli {
    /// Write the command's result document here.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Write the JSON report here.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
    /// Override the default enumeration cap (also read from RECONF_FORGE_CAP).
    #[arg(long, global = true)]
    pub cap: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Endpoints {
    /// Initial assignment file (defaults to the instance's embedded one).
    #[arg(long)]
    pub ini: Option<PathBuf>,
    /// Target assignment file (defaults to the instance's embedded one).
    #[arg(long)]
    pub tar: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct Walks {
    /// Stopping parameter: each walk step stops with probability 1/r.
    #[arg(long = "r")]
    pub r: usize,
    /// Truncation length and proof radius.
    #[arg(long = "R")]
    pub big_r: usize,
}

#[derive(Args, Debug, Clone)]
pub struct ProofSource {
    /// Proof file.
    #[arg(long, conflicts_with = "assignment")]
    pub proof: Option<PathBuf>,
    /// Assignment to lift into a proof of radius R.
    #[arg(long)]
    pub assignment: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Exact maximin reconfiguration value between two assignments.
    SolveCspReconf {
        instance: PathBuf,
        #[command(flatten)]
        endpoints: Endpoints,
    },
    /// Exact optimum value and a maximizing assignment.
    Opt { instance: PathBuf },
    /// Superimpose an always-satisfied d0-regular expander.
    Expanderize {
        instance: PathBuf,
        #[arg(long)]
        d0: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_EXPANDER_SLACK)]
        slack: f64,
    },
    /// Structure of the powered graph (walks of length up to R).
    Power {
        instance: PathBuf,
        #[command(flatten)]
        walks: Walks,
        /// Report the value of this assignment's lifted proof.
        #[arg(long)]
        assignment: Option<PathBuf>,
    },
    /// Lift an assignment to a proof of radius R.
    Lift {
        instance: PathBuf,
        #[arg(long)]
        assignment: PathBuf,
        #[arg(long = "R")]
        big_r: usize,
    },
    /// Decode a proof by popularity vote.
    Vote {
        instance: PathBuf,
        #[arg(long)]
        proof: PathBuf,
        #[command(flatten)]
        walks: Walks,
    },
    /// Reduce a binary instance to set cover.
    ReduceSetcover {
        instance: PathBuf,
        /// Comma-separated vertex names ranking the endpoints of every edge.
        #[arg(long)]
        order: Option<String>,
    },
    /// Reduce set cover reconfiguration to dominating set reconfiguration.
    ReduceDomset {
        system: PathBuf,
        #[command(flatten)]
        endpoints: Endpoints,
    },
    /// Exact minmax cost of reconfiguring between two covers.
    SolveCoverReconf {
        system: PathBuf,
        #[command(flatten)]
        endpoints: Endpoints,
    },
    /// The add-then-remove cover sequence and its cost.
    TwoApprox {
        system: PathBuf,
        #[command(flatten)]
        endpoints: Endpoints,
    },
    /// Lift a binary instance to a 4-ary reconfiguration instance.
    #[command(name = "lift-4cspr")]
    Lift4cspr {
        instance: PathBuf,
        #[arg(long)]
        a: Option<String>,
        #[arg(long)]
        b: Option<String>,
    },
    /// Collapse a q-ary reconfiguration instance (q ≥ 3) to a binary one.
    #[command(name = "collapse-2cspr")]
    Collapse2cspr {
        instance: PathBuf,
        #[command(flatten)]
        endpoints: Endpoints,
        #[arg(long, default_value_t = DEFAULT_TUPLE_ALPHABET_CAP)]
        alphabet_cap: u64,
    },
    /// Spectral summary of a graph, an instance's underlying graph, or a generated one.
    Spectral {
        #[arg(long, conflicts_with_all = ["instance", "random"])]
        graph: Option<PathBuf>,
        #[arg(long, conflicts_with = "random")]
        instance: Option<PathBuf>,
        /// Generate a random N-vertex D-regular graph.
        #[arg(long, num_args = 2, value_names = ["N", "D"])]
        random: Option<Vec<usize>>,
        /// With --random, retry until λ is at most this target.
        #[arg(long, requires = "random")]
        lambda_target: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Monte Carlo estimate of the truncated verifier's rejection probability.
    EstimateVerifier {
        instance: PathBuf,
        #[command(flatten)]
        source: ProofSource,
        #[command(flatten)]
        walks: Walks,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    /// Exact moments of the truncated faulty-step count.
    ExactStats {
        instance: PathBuf,
        #[command(flatten)]
        source: ProofSource,
        #[command(flatten)]
        walks: Walks,
        /// Comma-separated faulty edge indices.
        #[arg(long, conflicts_with = "violated_delta")]
        faulty: Option<String>,
        /// Use the violated edges of --assignment, trimmed by this fraction.
        #[arg(long, requires = "assignment")]
        violated_delta: Option<String>,
    },
    /// Exact parameter arithmetic of the amplification theorem.
    Params {
        #[arg(long)]
        epsilon: String,
        #[arg(long)]
        rho: String,
        #[arg(long, default_value = "1")]
        delta: String,
        #[arg(long, default_value = "1")]
        degree: String,
        #[arg(long, default_value = "0")]
        lambda: String,
        /// Also evaluate the set-cover soundness for this ε.
        #[arg(long)]
        sc_epsilon: Option<String>,
    },
    /// Run a reduction pipeline on a toy instance and check a property.
    Verify {
        instance: PathBuf,
        /// Comma-separated stages: expanderize, power, setcover, lift-4cspr, collapse-2cspr.
        #[arg(long)]
        pipeline: String,
        #[arg(long, default_value = "completeness")]
        check: String,
        #[arg(long, default_value_t = 4)]
        d0: usize,
        #[arg(long = "r", default_value_t = 2)]
        r: usize,
        #[arg(long = "R", default_value_t = 2)]
        big_r: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Ordered report fields; the text form keeps insertion order.
#[derive(Clone, Debug)]
pub struct Report {
    pub command: String,
    pub fields: Vec<(String, Value)>,
}

impl Report {
    fn new(command: &str) -> Self {
        Report { command: command.to_string(), fields: Vec::new() }
    }

    fn put(&mut self, key: &str, value: impl Into<Value>) {
        self.fields.push((key.to_string(), value.into()));
    }

    fn rational(&mut self, key: &str, x: &BigRational) {
        self.put(key, format_ratio(x));
        self.put(&format!("{key}_decimal"), format_decimal(x, 6));
    }

    fn real(&mut self, key: &str, x: f64) {
        self.put(key, format!("{x:.9}"));
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn text(&self) -> String {
        let mut s = format!("command: {}\n", self.command);
        for (k, v) in &self.fields {
            match v {
                Value::String(t) => s.push_str(&format!("{k}: {t}\n")),
                other => s.push_str(&format!("{k}: {other}\n")),
            }
        }
        s
    }

    pub fn document(&self) -> Document {
        Document::Report(ReportDoc {
            command: self.command.clone(),
            fields: self.fields.iter().cloned().collect(),
        })
    }
}

pub struct Outcome {
    pub report: Report,
    pub artifact: Option<Document>,
    /// Set by checking commands; `Some(false)` exits nonzero.
    pub passed: Option<bool>,
}

impl Outcome {
    fn new(report: Report, artifact: Option<Document>) -> Self {
        Outcome { report, artifact, passed: None }
    }
}

struct Caps {
    explicit: Option<u64>,
}

impl Caps {
    fn from_cli(cap: Option<u64>) -> Result<Self> {
        if cap.is_some() {
            return Ok(Caps { explicit: cap });
        }
        match std::env::var(CAP_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map(|c| Caps { explicit: Some(c) })
                .map_err(|_| Error::Validation(format!("{CAP_ENV} must be a nonnegative integer, got {v:?}"))),
            Err(_) => Ok(Caps { explicit: None }),
        }
    }

    fn or(&self, default: u64) -> u64 {
        self.explicit.unwrap_or(default)
    }
}

fn endpoints(
    inst: &format::Instance,
    e: &Endpoints,
) -> Result<(Assignment, Assignment)> {
    let g = &inst.graph;
    let pick = |path: &Option<PathBuf>, embedded: &Option<Assignment>, name: &str| -> Result<Assignment> {
        match (path, embedded) {
            (Some(p), _) => format::read_assignment(p, g),
            (None, Some(a)) => Ok(a.clone()),
            (None, None) => Err(Error::Validation(format!("no {name} assignment: pass --{name} or embed one"))),
        }
    };
    Ok((pick(&e.ini, &inst.initial, "ini")?, pick(&e.tar, &inst.target, "tar")?))
}

fn cover_endpoints(inst: &format::CoverInstance, e: &Endpoints) -> Result<(Cover, Cover)> {
    let pick = |path: &Option<PathBuf>, embedded: &Option<Cover>, name: &str| -> Result<Cover> {
        match (path, embedded) {
            (Some(p), _) => format::read_cover(p, &inst.system),
            (None, Some(c)) => Ok(c.clone()),
            (None, None) => Err(Error::Validation(format!("no {name} cover: pass --{name} or embed one"))),
        }
    };
    Ok((pick(&e.ini, &inst.initial, "ini")?, pick(&e.tar, &inst.target, "tar")?))
}

fn tokens(g: &ConstraintGraph, psi: &Assignment) -> Value {
    Value::from(psi.values().iter().map(|&s| g.alphabet().token(s).to_string()).collect::<Vec<_>>())
}

fn load_proof(g: &ConstraintGraph, src: &ProofSource, radius: usize) -> Result<Proof> {
    match (&src.proof, &src.assignment) {
        (Some(p), _) => format::read_proof(p, g),
        (None, Some(a)) => lift_assignment(g, &format::read_assignment(a, g)?, radius),
        (None, None) => Err(Error::Validation("pass --proof or --assignment".into())),
    }
}

fn parse_rational(flag: &str, s: &str) -> Result<BigRational> {
    parse_ratio(s).map_err(|_| Error::Validation(format!("--{flag}: not a rational number: {s:?}")))
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let caps = Caps::from_cli(cli.cap)?;
    match &cli.command {
        Command::SolveCspReconf { instance, endpoints: e } => {
            let inst = format::read_instance(instance)?;
            let (ini, tar) = endpoints(&inst, e)?;
            let res = maximin_reconf_value(&inst.graph, &ini, &tar, caps.or(DEFAULT_STATE_CAP))?;
            let mut rep = Report::new("solve-csp-reconf");
            rep.rational("value", &res.value);
            rep.put("worst_satisfied", res.satisfied);
            rep.put("edges", inst.graph.num_edges());
            rep.put("witness_length", res.witness.len());
            Ok(Outcome::new(rep, Some(format::sequence_doc(&inst.graph, &res.witness))))
        }
        Command::Opt { instance } => {
            let inst = format::read_instance(instance)?;
            let (value, psi) = opt_assignment(&inst.graph, caps.or(DEFAULT_STATE_CAP))?;
            let mut rep = Report::new("opt");
            rep.rational("value", &value);
            rep.put("assignment", tokens(&inst.graph, &psi));
            Ok(Outcome::new(rep, Some(format::assignment_doc(&inst.graph, &psi))))
        }
        Command::Expanderize { instance, d0, seed, slack } => {
            let inst = format::read_instance(instance)?;
            let delta = inst.graph.regular_degree();
            let ex = expanderize(&inst.graph, *d0, *seed, *slack)?;
            let mut rep = Report::new("expanderize");
            rep.put("base_degree", delta.unwrap_or(0));
            rep.put("d0", *d0);
            rep.put("degree", ex.graph.regular_degree().unwrap_or(0));
            rep.put("edges", ex.graph.num_edges());
            rep.real("expander_lambda", ex.expander_lambda);
            rep.real("lambda_target", ex.lambda_target);
            rep.put("tolerance", format!("{LAMBDA_TOLERANCE:e}"));
            rep.put("seed", *seed);
            let doc = format::csp_doc(&ex.graph, inst.initial.as_ref(), inst.target.as_ref())?;
            Ok(Outcome::new(rep, Some(Document::Csp(doc))))
        }
        Command::Power { instance, walks, assignment } => {
            if cli.out.is_some() {
                return Err(Error::Unsupported(
                    "powered graphs have predicate constraints and cannot be written; use --report".into(),
                ));
            }
            let inst = format::read_instance(instance)?;
            let g = &inst.graph;
            let p = power(g, walks.r, walks.big_r, caps.or(DEFAULT_WALK_CAP))?;
            let d = p.base_degree();
            let mut rep = Report::new("power");
            rep.put("r", walks.r);
            rep.put("R", walks.big_r);
            rep.put("base_degree", d);
            rep.put("walks", p.num_walks());
            rep.put("degree", p.degree().to_string());
            let expected: BigUint = p.degree() * 2u32;
            let incidence: Vec<BigUint> = (0..g.num_vertices()).map(|v| p.weighted_incidence(v)).collect();
            rep.put("incidence_expected", expected.to_string());
            rep.put("incidence_uniform", incidence.iter().all(|i| *i == expected));
            let base_lambda = second_eigenvalue(&SimpleMultigraph::from_constraint_graph(g)?)?;
            rep.real("base_lambda", base_lambda);
            rep.real("lambda_prime", p.lambda_prime());
            rep.real("lambda_prime_bound", lambda_bound(walks.r, walks.big_r, d, base_lambda));
            if let Some(a) = assignment {
                let psi = format::read_assignment(a, g)?;
                let proof = lift_assignment(g, &psi, walks.big_r)?;
                rep.rational("lifted_value", &p.value(&proof));
            }
            Ok(Outcome::new(rep, None))
        }
        Command::Lift { instance, assignment, big_r } => {
            let inst = format::read_instance(instance)?;
            let psi = format::read_assignment(assignment, &inst.graph)?;
            let proof = lift_assignment(&inst.graph, &psi, *big_r)?;
            let mut rep = Report::new("lift");
            rep.put("radius", *big_r);
            rep.put("opinions", (0..proof.num_vertices()).map(|x| proof.opinions_of(x).len()).sum::<usize>());
            Ok(Outcome::new(rep, Some(format::proof_doc(&inst.graph, &proof))))
        }
        Command::Vote { instance, proof, walks } => {
            let inst = format::read_instance(instance)?;
            let proof = format::read_proof(proof, &inst.graph)?;
            let psi = popularity_vote(&inst.graph, &proof, walks.r, walks.big_r)?;
            let mut rep = Report::new("vote");
            rep.put("assignment", tokens(&inst.graph, &psi));
            rep.rational("value", &reconf_core::value(&inst.graph, &psi)?);
            Ok(Outcome::new(rep, Some(format::assignment_doc(&inst.graph, &psi))))
        }
        Command::ReduceSetcover { instance, order } => {
            let inst = format::read_instance(instance)?;
            let g = &inst.graph;
            let order = order
                .as_deref()
                .map(|o| {
                    o.split(',')
                        .map(|name| {
                            g.vertex_index(name.trim())
                                .ok_or_else(|| Error::Validation(format!("--order: unknown vertex {name:?}")))
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .transpose()?;
            let red = reduce_to_setcover(g, order.as_deref())?;
            let ini = inst.initial.as_ref().map(|a| red.cover_of_assignment(a)).transpose()?;
            let tar = inst.target.as_ref().map(|a| red.cover_of_assignment(a)).transpose()?;
            let mut rep = Report::new("reduce-setcover");
            rep.put("universe", red.system.universe_len());
            rep.put("sets", red.system.num_sets());
            rep.put("vertices", g.num_vertices());
            if let Some(c) = &ini {
                rep.put("initial_cover_size", c.len());
            }
            Ok(Outcome::new(rep, Some(format::set_system_doc(&red.system, ini.as_ref(), tar.as_ref()))))
        }
        Command::ReduceDomset { system, endpoints: e } => {
            let inst = format::read_set_system(system)?;
            let (ini, tar) = cover_endpoints(&inst, e)?;
            let split = reduce_to_domset(&inst.system, &ini, &tar)?;
            let mut graph = SimpleMultigraph::empty(split.num_vertices);
            for u in 0..split.num_vertices {
                for v in split.closed[u].ones().filter(|&v| v > u) {
                    graph.add_edge(u, v);
                }
            }
            let mut rep = Report::new("reduce-domset");
            rep.put("vertices", split.num_vertices);
            rep.put("set_vertices", split.num_sets);
            rep.put("edges", graph.num_edges());
            rep.put("initial", split.initial.iter().copied().collect::<Vec<_>>());
            rep.put("target", split.target.iter().copied().collect::<Vec<_>>());
            Ok(Outcome::new(rep, Some(format::graph_doc(&graph))))
        }
        Command::SolveCoverReconf { system, endpoints: e } => {
            let inst = format::read_set_system(system)?;
            let (ini, tar) = cover_endpoints(&inst, e)?;
            let res = minmax_cover_cost(&inst.system, &ini, &tar, caps.or(DEFAULT_COVER_CAP))?;
            let mut rep = Report::new("solve-cover-reconf");
            rep.rational("cost", &res.cost);
            rep.put("max_size", res.max_size);
            rep.put("opt", res.opt);
            rep.put("witness_length", res.witness.len());
            Ok(Outcome::new(rep, Some(format::cover_sequence_doc(&inst.system, &res.witness))))
        }
        Command::TwoApprox { system, endpoints: e } => {
            let inst = format::read_set_system(system)?;
            let (ini, tar) = cover_endpoints(&inst, e)?;
            let seq = trivial_two_approx(&inst.system, &ini, &tar)?;
            let opt = min_cover_size(&inst.system, caps.or(DEFAULT_COVER_CAP))?;
            let mut rep = Report::new("two-approx");
            rep.put("max_size", seq.max_size());
            rep.put("opt", opt);
            rep.rational("cost", &sequence_cost(&inst.system, &seq, opt)?);
            rep.put("length", seq.len());
            Ok(Outcome::new(rep, Some(format::cover_sequence_doc(&inst.system, &seq))))
        }
        Command::Lift4cspr { instance, a, b } => {
            let inst = format::read_instance(instance)?;
            let g = &inst.graph;
            let sym = |t: &Option<String>| {
                t.as_deref()
                    .map(|t| g.alphabet().symbol(t).ok_or_else(|| Error::Validation(format!("unknown symbol {t:?}"))))
                    .transpose()
            };
            let lifted = csp_to_4cspr(g, sym(a)?, sym(b)?)?;
            let mut rep = Report::new("lift-4cspr");
            rep.put("vertices", lifted.graph.num_vertices());
            rep.put("edges", lifted.graph.num_edges());
            rep.put("initial", tokens(&lifted.graph, &lifted.ini));
            rep.put("target", tokens(&lifted.graph, &lifted.tar));
            let doc = format::csp_doc(&lifted.graph, Some(&lifted.ini), Some(&lifted.tar))?;
            Ok(Outcome::new(rep, Some(Document::Csp(doc))))
        }
        Command::Collapse2cspr { instance, endpoints: e, alphabet_cap } => {
            let inst = format::read_instance(instance)?;
            let (ini, tar) = endpoints(&inst, e)?;
            let lifted = qcspr_to_2cspr(&inst.graph, &ini, &tar, *alphabet_cap)?;
            let mut rep = Report::new("collapse-2cspr");
            rep.put("alphabet", lifted.graph.alphabet().len());
            rep.put("vertices", lifted.graph.num_vertices());
            rep.put("edges", lifted.graph.num_edges());
            let doc = format::csp_doc(&lifted.graph, Some(&lifted.ini), Some(&lifted.tar))?;
            Ok(Outcome::new(rep, Some(Document::Csp(doc))))
        }
        Command::Spectral { graph, instance, random, lambda_target, seed } => {
            let g = match (graph, instance, random) {
                (Some(p), _, _) => format::read_graph(p)?,
                (_, Some(p), _) => SimpleMultigraph::from_constraint_graph(&format::read_instance(p)?.graph)?,
                (_, _, Some(nd)) => {
                    let (n, d) = (nd[0], nd[1]);
                    match lambda_target {
                        Some(t) => make_expander(n, d, *t, *seed)?,
                        None => random_regular(n, d, &mut reconf_core::verifier::trial_rng(*seed, 0))?,
                    }
                }
                _ => return Err(Error::Validation("pass --graph, --instance or --random".into())),
            };
            let mut rep = Report::new("spectral");
            rep.put("vertices", g.n());
            rep.put("edges", g.num_edges());
            let d = g.regular_degree().ok_or_else(|| Error::NotRegular("vertex degrees differ".into()))?;
            rep.put("degree", d);
            let lambda = second_eigenvalue(&g)?;
            rep.real("lambda", lambda);
            rep.real("lambda_over_degree", lambda / d as f64);
            rep.real("ramanujan_bound", 2.0 * ((d as f64) - 1.0).max(0.0).sqrt());
            rep.put("loops_or_multi_edges", g.has_loops_or_multi_edges());
            rep.put("tolerance", format!("{LAMBDA_TOLERANCE:e}"));
            Ok(Outcome::new(rep, Some(format::graph_doc(&g))))
        }
        Command::EstimateVerifier { instance, source, walks, trials, seed, threads } => {
            let inst = format::read_instance(instance)?;
            let proof = load_proof(&inst.graph, source, walks.big_r)?;
            let est = estimate_rejection(&inst.graph, &proof, walks.r, walks.big_r, *trials, *seed, *threads)?;
            let mut rep = Report::new("estimate-verifier");
            rep.put("trials", est.trials);
            rep.put("rejections", est.rejections);
            rep.real("p_hat", est.p_hat);
            rep.real("stderr", est.stderr);
            rep.put("seed", *seed);
            rep.put("rng", RNG_CONTRACT);
            Ok(Outcome::new(rep, None))
        }
        Command::ExactStats { instance, source, walks, faulty, violated_delta } => {
            let inst = format::read_instance(instance)?;
            let g = &inst.graph;
            let proof = load_proof(g, source, walks.big_r)?;
            let f = match (faulty, violated_delta) {
                (Some(list), _) => {
                    let idx = list
                        .split(',')
                        .map(|t| t.trim().parse::<usize>().map_err(|_| Error::Validation(format!("--faulty: bad index {t:?}"))))
                        .collect::<Result<Vec<_>>>()?;
                    Some(idx)
                }
                (None, Some(delta)) => {
                    let psi = format::read_assignment(source.assignment.as_ref().expect("clap requires it"), g)?;
                    Some(amplify::select_violated_edges(g, &psi, walks.r, &parse_rational("violated-delta", delta)?)?)
                }
                (None, None) => None,
            };
            let mask = f.as_deref().map(|e| edge_mask(g, e)).transpose()?;
            let s = exact_truncated_stats(g, &proof, mask.as_deref(), walks.r, walks.big_r, caps.or(DEFAULT_WALK_CAP))?;
            let mut rep = Report::new("exact-stats");
            if let Some(f) = &f {
                rep.put("faulty", f.clone());
            }
            rep.rational("mean", &s.mean);
            rep.rational("second_moment", &s.second_moment);
            rep.rational("prob_positive", &s.prob_positive);
            rep.rational("prob_reject", &s.prob_reject);
            let pz = s.second_moment.is_zero() || s.prob_positive >= &s.mean * &s.mean / &s.second_moment;
            rep.put("paley_zygmund", pz);
            Ok(Outcome::new(rep, None))
        }
        Command::Params { epsilon, rho, delta, degree, lambda, sc_epsilon } => {
            let eps = parse_rational("epsilon", epsilon)?;
            let rho = parse_rational("rho", rho)?;
            let delta: BigUint =
                delta.parse().map_err(|_| Error::Validation(format!("--delta: not a positive integer: {delta:?}")))?;
            let d = parse_rational("degree", degree)?;
            let lam = parse_rational("lambda", lambda)?;
            let p = amplify::amplification_parameters(&eps, &rho, &delta, &d, &lam)?;
            let mut rep = Report::new("params");
            rep.rational("epsilon", &p.eps);
            rep.rational("rho", &p.rho);
            rep.put("r", p.r);
            rep.put("R", p.big_r);
            rep.put("C", p.c.to_string());
            rep.put("d0", p.d0.to_string());
            rep.rational("eps_expanderized", &p.eps_expanderized);
            rep.rational("eps_prime", &p.eps_prime);
            rep.put("coefficient_ok", p.coefficient_ok);
            rep.put("expander_ratio_ok", p.expander_ratio_ok);
            rep.put("c_chain_ok", p.c_chain_ok);
            if let Some(s) = sc_epsilon {
                let e = parse_rational("sc-epsilon", s)?;
                rep.rational("sc_eps_prime", &sc_soundness_epsilon(&e, &d, &lam)?);
                rep.rational("sc_ratio", &(BigRational::from_integer(2.into()) - e));
            }
            Ok(Outcome::new(rep, None))
        }
        Command::Verify { instance, pipeline, check, d0, r, big_r, seed } => {
            let inst = format::read_instance(instance)?;
            let stages: Vec<&str> = pipeline.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
            verify(&inst, &stages, check, *d0, *r, *big_r, *seed, &caps)
        }
    }
}

struct Pipeline<'a> {
    caps: &'a Caps,
    rep: Report,
    ok: bool,
}

impl Pipeline<'_> {
    fn record(&mut self, key: &str, pass: bool, detail: String) {
        self.ok &= pass;
        self.rep.put(key, format!("{} ({detail})", if pass { "PASS" } else { "FAIL" }));
    }

    /// Exact maximin when the state space fits, otherwise the witness value.
    fn full_value(&mut self, key: &str, g: &ConstraintGraph, w: &ReconfigurationSequence) -> Result<()> {
        let witness_ok = validate_sequence(g, w).is_ok() && sequence_value(g, w)?.is_one();
        match oracle::state_count(g, self.caps.or(DEFAULT_STATE_CAP)) {
            Ok(_) => {
                let m = maximin_reconf_value(g, w.first(), w.last(), self.caps.or(DEFAULT_STATE_CAP))?;
                self.record(key, witness_ok && m.value.is_one(), format!("oracle maximin {}", format_ratio(&m.value)))
            }
            Err(Error::Capacity(_)) => self.record(key, witness_ok, "witness value 1/1".into()),
            Err(e) => return Err(e),
        }
        Ok(())
    }
}

#[allow(clippy::too_many_arguments)]
fn verify(
    inst: &format::Instance,
    stages: &[&str],
    check: &str,
    d0: usize,
    r: usize,
    radius: usize,
    seed: u64,
    caps: &Caps,
) -> Result<Outcome> {
    if check != "completeness" {
        return Err(Error::Validation(format!("unknown check {check:?}; supported: completeness")));
    }
    if stages.is_empty() {
        return Err(Error::Validation("empty pipeline".into()));
    }
    let mut run = Pipeline { caps, rep: Report::new("verify"), ok: true };
    run.rep.put("pipeline", stages.join(","));
    run.rep.put("check", check);
    let mut g = inst.graph.clone();
    // The 4-ary lift starts from a plain instance; everything else from a reconfiguration one.
    let mut witness = if stages[0] == "lift-4cspr" {
        let (value, psi) = opt_assignment(&g, caps.or(DEFAULT_STATE_CAP))?;
        run.record("source", value.is_one(), format!("opt {}", format_ratio(&value)));
        ReconfigurationSequence::single(psi)
    } else {
        let (ini, tar) = match (&inst.initial, &inst.target) {
            (Some(a), Some(b)) => (a.clone(), b.clone()),
            _ => return Err(Error::Validation("verify needs an instance with embedded initial and target".into())),
        };
        let source = maximin_reconf_value(&g, &ini, &tar, caps.or(DEFAULT_STATE_CAP))?;
        run.record("source", source.value.is_one(), format!("maximin {}", format_ratio(&source.value)));
        source.witness
    };
    let mut terminal = None;

    for (i, &stage) in stages.iter().enumerate() {
        if let Some(t) = terminal {
            return Err(Error::Validation(format!("stage {stage:?} cannot follow {t:?}")));
        }
        let key = format!("stage_{}_{stage}", i + 1);
        match stage {
            "expanderize" => {
                let ex = expanderize(&g, d0, seed, DEFAULT_EXPANDER_SLACK)?;
                g = ex.graph;
                run.full_value(&key, &g, &witness)?;
            }
            "power" => {
                let p = power(&g, r, radius, caps.or(DEFAULT_WALK_CAP))?;
                let mut proofs = vec![lift_assignment(&g, witness.first(), radius)?];
                for pair in witness.steps().windows(2) {
                    let seq = completeness_sequence(&g, &pair[0], &pair[1], radius)?;
                    proofs.extend(seq.into_iter().skip(1));
                }
                let pass_all = proofs.iter().all(|pr| p.value(pr).is_one());
                let failing: usize = proofs.iter().map(|pr| p.failing_walks(pr).count()).sum();
                let decoded = decode_proof_sequence(&g, &proofs, r, radius)?;
                let decode_ok = validate_sequence(&g, &decoded).is_ok()
                    && decoded.first() == witness.first()
                    && decoded.last() == witness.last();
                run.record(
                    &key,
                    pass_all && decode_ok,
                    format!("{} proofs, {} walks, {failing} failing walk tests", proofs.len(), p.num_walks()),
                );
                terminal = Some(stage);
            }
            "setcover" => {
                let red = reduce_to_setcover(&g, None)?;
                let covers: CoverSequence = red.cover_path(witness.steps())?;
                let valid = validate_cover_sequence(&red.system, &covers).is_ok();
                let opt = match min_cover_size(&red.system, caps.or(DEFAULT_COVER_CAP)) {
                    Ok(o) => o,
                    Err(Error::Capacity(_)) => g.num_vertices(),
                    Err(e) => return Err(e),
                };
                let cost = sequence_cost(&red.system, &covers, opt)?;
                run.record(&key, valid && cost.is_one(), format!("cover cost {} with OPT {opt}", format_ratio(&cost)));
                terminal = Some(stage);
            }
            "lift-4cspr" => {
                let lifted = csp_to_4cspr(&g, None, None)?;
                let w = completeness_witness_4cspr(&g, witness.first(), None, None)?;
                let ends = w.first() == &lifted.ini && w.last() == &lifted.tar;
                g = lifted.graph;
                witness = w;
                run.full_value(&key, &g, &witness)?;
                if !ends {
                    run.record(&format!("{key}_endpoints"), false, "witness endpoints differ".into());
                }
            }
            "collapse-2cspr" => {
                let lifted = qcspr_to_2cspr(&g, witness.first(), witness.last(), DEFAULT_TUPLE_ALPHABET_CAP)?;
                let w = collapse_witness(&g, &witness, DEFAULT_TUPLE_ALPHABET_CAP)?;
                let ends = w.first() == &lifted.ini && w.last() == &lifted.tar;
                g = lifted.graph;
                witness = w;
                run.full_value(&key, &g, &witness)?;
                if !ends {
                    run.record(&format!("{key}_endpoints"), false, "witness endpoints differ".into());
                }
            }
            other => {
                return Err(Error::Validation(format!(
                    "unknown stage {other:?}; known: expanderize, power, setcover, lift-4cspr, collapse-2cspr"
                )))
            }
        }
    }
    let ok = run.ok;
    run.rep.put("result", if ok { "PASS" } else { "FAIL" });
    Ok(Outcome { report: run.rep, artifact: None, passed: Some(ok) })
}

/// Parses arguments, runs, and writes outputs; returns the process exit code and the
/// text written to stdout.
pub fn execute<I, T>(args: I) -> (i32, String, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            return (code, if code == 0 { e.to_string() } else { String::new() }, if code == 0 { String::new() } else { e.to_string() });
        }
    };
    match run(&cli).and_then(|o| {
        if let (Some(path), Some(doc)) = (&cli.out, &o.artifact) {
            format::write_file(path, doc)?;
        }
        if let Some(path) = &cli.report {
            format::write_file(path, &o.report.document())?;
        }
        Ok(o)
    }) {
        Ok(o) => {
            let code = if o.passed == Some(false) { 1 } else { 0 };
            (code, o.report.text(), String::new())
        }
        Err(e) => (e.exit_code(), String::new(), format!("error: {e}\n")),
    }
}
