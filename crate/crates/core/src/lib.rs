//! Reconfiguration gap-amplification toolkit.
//!
//! Constraint graphs and reconfiguration sequences ([`csp`]), exact small-instance
//! oracles ([`oracle`]), spectral utilities ([`spectral`]), the expanderize/power/vote
//! pipeline ([`amplify`]), the walk verifier ([`verifier`]), set-cover and
//! dominating-set reductions ([`covering`]) and the NP-hardness reductions ([`npred`]).

pub mod amplify;
pub mod covering;
pub mod csp;
pub mod error;
pub mod gen;
pub mod npred;
pub mod oracle;
pub mod rational;
pub mod spectral;
pub mod verifier;

pub use csp::{
    sequence_value, validate_sequence, value, Alphabet, Assignment, Constraint, ConstraintGraph, Edge,
    ReconfigurationSequence, SequenceViolation, Step, Symbol, ViolationReason,
};
pub use error::{Error, Result};
