//! Expanderization, alphabet squaring, powering and decoding.

pub mod params;
pub mod power;
pub mod proof;
pub mod squared;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::csp::{Assignment, Constraint, ConstraintGraph, Edge};
use crate::error::{Error, Result};
use crate::rational::{ceil, ratio};
use crate::spectral::{make_expander, second_eigenvalue, SimpleMultigraph};

pub use params::{amplification_parameters, AmplificationParameters};
pub use power::{power, PoweredGraph, Walk};
pub use proof::{
    completeness_sequence, decode_proof_sequence, interpolate, lift_assignment, popularity_vote, Proof, Voter,
};
pub use squared::{consistent, square_alphabet, SqSymbol, SquaredAlphabet};

/// Relative slack on the `2√d₀` expander target.
pub const DEFAULT_EXPANDER_SLACK: f64 = 0.1;

#[derive(Clone, Debug)]
pub struct Expanderized {
    pub graph: ConstraintGraph,
    pub expander: SimpleMultigraph,
    pub expander_lambda: f64,
    pub lambda_target: f64,
}

/// Superimposes a `d0`-regular expander whose edges are always satisfied.
///
/// The output keeps the original edges first, in order, followed by the expander's.
pub fn expanderize(g: &ConstraintGraph, d0: usize, seed: u64, slack: f64) -> Result<Expanderized> {
    g.require_binary("expanderization")?;
    let delta = g.require_regular()?;
    if d0 < 4 || d0 % 2 != 0 {
        return Err(Error::validation(format!("d0 must be an even integer ≥ 4, got {d0}")));
    }
    let lambda_target = 2.0 * (d0 as f64).sqrt() * (1.0 + slack);
    let expander = make_expander(g.num_vertices(), d0, lambda_target, seed)?;
    let expander_lambda = second_eigenvalue(&expander)?;
    let mut edges = g.edges().to_vec();
    edges.extend(expander.edge_list().into_iter().map(|(u, v)| Edge::new(vec![u, v], Constraint::Any)));
    let graph = ConstraintGraph::new(2, g.vertices().to_vec(), g.alphabet().clone(), edges)?;
    debug_assert_eq!(graph.regular_degree(), Some(delta + d0));
    Ok(Expanderized { graph, expander, expander_lambda, lambda_target })
}

/// Violated edges of `psi`, the first ones in edge order, trimmed to
/// `⌈δ|E|⌉` when `δ ≤ 1/r − 1/|E|` and to `⌈|E|/r − 1⌉` otherwise.
pub fn select_violated_edges(g: &ConstraintGraph, psi: &Assignment, r: usize, delta: &BigRational) -> Result<Vec<usize>> {
    psi.validate(g)?;
    if r < 1 {
        return Err(Error::validation("r must be positive"));
    }
    if *delta <= BigRational::zero() || *delta > BigRational::one() {
        return Err(Error::Domain("δ must lie in (0, 1]".into()));
    }
    let m = g.num_edges();
    let violated: Vec<usize> = (0..m).filter(|&e| !g.edge_satisfied(e, psi)).collect();
    if violated.is_empty() {
        return Err(Error::validation("the assignment satisfies every edge; nothing to select"));
    }
    let window = ratio(1, r) - ratio(1, m);
    let keep = if *delta <= window { ceil(&(delta * ratio(m, 1))) } else { ceil(&(window * ratio(m, 1))) };
    let keep: usize = keep.try_into().unwrap_or(0);
    if keep > violated.len() {
        return Err(Error::Domain(format!(
            "need {keep} violated edges but the assignment violates only {}",
            violated.len()
        )));
    }
    Ok(violated[..keep].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csp::value;
    use crate::gen::cycle_neq;

    #[test]
    fn c4_expanderized_value() {
        let g = cycle_neq(4, 2);
        let out = expanderize(&g, 4, 0, DEFAULT_EXPANDER_SLACK).unwrap();
        assert_eq!(out.graph.regular_degree(), Some(6));
        assert_eq!(value(&out.graph, &Assignment::from_indices(&[0, 0, 0, 0])).unwrap(), ratio(2, 3));
        assert_eq!(value(&out.graph, &Assignment::from_indices(&[0, 1, 0, 1])).unwrap(), ratio(1, 1));
        assert!(expanderize(&g, 3, 0, 0.1).is_err());
    }

    #[test]
    fn violated_window() {
        let g = cycle_neq(8, 2);
        let psi = Assignment::from_indices(&[0; 8]);
        let f = select_violated_edges(&g, &psi, 2, &ratio(1, 4)).unwrap();
        assert_eq!(f, vec![0, 1]);
        let f = select_violated_edges(&g, &psi, 2, &ratio(1, 1)).unwrap();
        assert_eq!(f.len(), 3);
        let sat = Assignment::from_indices(&[0, 1, 0, 1, 0, 1, 0, 1]);
        assert!(select_violated_edges(&g, &sat, 2, &ratio(1, 4)).is_err());
    }
}
