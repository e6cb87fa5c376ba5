//! The running example shipped with the crate.

use crate::automata::Plant;
use crate::format::{parse_des, parse_pairs, parse_policy};
use crate::labeled::LabeledSystem;
use crate::property::DistinguishabilitySpec;
use crate::realization::Policy;

pub const RUNNING_EXAMPLE_DES: &str = include_str!("../fixtures/running_example.des");
/// `{q0,q1,q3,q5} × {q2,q4}`.
pub const SEPARATION_PAIRS: &str = include_str!("../fixtures/separation.pairs");
pub const EMPTY_PAIRS: &str = include_str!("../fixtures/empty.pairs");
/// Hand-written policy rooted at `q0NNY`, used for estimation examples.
pub const REFERENCE_POLICY: &str = include_str!("../fixtures/reference.policy");

pub fn running_example() -> Plant {
    parse_des(RUNNING_EXAMPLE_DES).expect("bundled plant parses")
}

pub fn separation_spec(plant: &Plant) -> DistinguishabilitySpec {
    parse_pairs(SEPARATION_PAIRS, plant).expect("bundled pairs parse")
}

pub fn reference_policy(sys: &LabeledSystem) -> Policy {
    parse_policy(REFERENCE_POLICY, sys).expect("bundled policy parses")
}
