//! Properties of the receiver's state estimate.

use std::collections::BTreeSet;

use crate::automata::{Plant, StateId};
use crate::error::Result;
use crate::labeled::LabeledState;
use crate::observer::{DynamicObserver, ObserverState};

/// A predicate over sets of plant states.
pub trait IsProperty {
    fn holds(&self, estimate: &BTreeSet<StateId>) -> bool;

    fn describe(&self, plant: &Plant) -> String;
}

/// Ordered pairs of plant states that must never be confused.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DistinguishabilitySpec {
    pairs: BTreeSet<(StateId, StateId)>,
}

impl DistinguishabilitySpec {
    pub fn new(pairs: impl IntoIterator<Item = (StateId, StateId)>) -> Self {
        DistinguishabilitySpec {
            pairs: pairs.into_iter().collect(),
        }
    }

    pub fn from_names(plant: &Plant, pairs: &[(&str, &str)]) -> Result<Self> {
        let pairs = pairs
            .iter()
            .map(|(a, b)| Ok((plant.state_id(a)?, plant.state_id(b)?)))
            .collect::<Result<BTreeSet<_>>>()?;
        Ok(DistinguishabilitySpec { pairs })
    }

    /// All pairs of `left × right`.
    pub fn product(left: &[StateId], right: &[StateId]) -> Self {
        Self::new(
            left.iter()
                .flat_map(|&a| right.iter().map(move |&b| (a, b))),
        )
    }

    pub fn pairs(&self) -> &BTreeSet<(StateId, StateId)> {
        &self.pairs
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Distinguishability {
    spec: DistinguishabilitySpec,
}

pub fn distinguishability(spec: DistinguishabilitySpec) -> Distinguishability {
    Distinguishability { spec }
}

impl Distinguishability {
    pub fn spec(&self) -> &DistinguishabilitySpec {
        &self.spec
    }

    /// First pair contained in `estimate`, if any.
    pub fn violation(&self, estimate: &BTreeSet<StateId>) -> Option<(StateId, StateId)> {
        self.spec
            .pairs
            .iter()
            .copied()
            .find(|(a, b)| estimate.contains(a) && estimate.contains(b))
    }
}

impl IsProperty for Distinguishability {
    fn holds(&self, estimate: &BTreeSet<StateId>) -> bool {
        self.violation(estimate).is_none()
    }

    fn describe(&self, plant: &Plant) -> String {
        let pairs: Vec<String> = self
            .spec
            .pairs
            .iter()
            .map(|&(a, b)| format!("({},{})", plant.state_name(a), plant.state_name(b)))
            .collect();
        format!("distinguishability {{{}}}", pairs.join(","))
    }
}

/// Forget labels.
pub fn underlying_states<'a>(
    members: impl IntoIterator<Item = &'a LabeledState>,
) -> BTreeSet<StateId> {
    members.into_iter().map(|ls| ls.base).collect()
}

/// Observer states whose underlying plant states violate `prop`.
pub fn z_dis(obs: &DynamicObserver, prop: &dyn IsProperty) -> BTreeSet<ObserverState> {
    obs.states()
        .iter()
        .filter(|z| !prop.holds(&underlying_states(z.members())))
        .cloned()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::labeled::LabeledSystem;
    use crate::observer::build_observer;

    fn ids(plant: &Plant, names: &[&str]) -> BTreeSet<StateId> {
        names.iter().map(|n| plant.state_id(n).unwrap()).collect()
    }

    #[test]
    fn distinguishability_verdicts() {
        let g = fixtures::running_example();
        let t = distinguishability(fixtures::separation_spec(&g));
        assert!(!t.holds(&ids(&g, &["q1", "q2"])));
        assert!(t.holds(&ids(&g, &["q0", "q5", "q1"])));
        let none = distinguishability(DistinguishabilitySpec::default());
        assert!(none.holds(&ids(&g, &["q0", "q1", "q2", "q3", "q4", "q5"])));
    }

    #[test]
    fn unknown_states_are_rejected() {
        let g = fixtures::running_example();
        assert!(DistinguishabilitySpec::from_names(&g, &[("q0", "q9")]).is_err());
    }

    #[test]
    fn label_erasure() {
        let sys = LabeledSystem::new(fixtures::running_example()).unwrap();
        let g = sys.plant();
        let z = |names: &[&str]| -> Vec<LabeledState> {
            names.iter().map(|n| sys.parse_state(n).unwrap()).collect()
        };
        assert_eq!(
            underlying_states(&z(&["q1N", "q2N", "q1Y"])),
            ids(g, &["q1", "q2"])
        );
        assert_eq!(underlying_states(&z(&["q2Y"])), ids(g, &["q2"]));
        assert_eq!(
            underlying_states(&z(&["q0NNY", "q5", "q1Y"])),
            ids(g, &["q0", "q5", "q1"])
        );
    }

    #[test]
    fn dissatisfying_observer_states() {
        let sys = LabeledSystem::new(fixtures::running_example()).unwrap();
        let obs = build_observer(&sys).unwrap();
        let st =
            |names: &[&str]| ObserverState::new(names.iter().map(|n| sys.parse_state(n).unwrap()));
        let t = distinguishability(fixtures::separation_spec(sys.plant()));
        let bad = z_dis(&obs, &t);
        assert!(bad.contains(&st(&["q1N", "q2N"])));
        assert!(!bad.contains(&st(&["q0NNY", "q5", "q1Y"])));
        let none = distinguishability(DistinguishabilitySpec::default());
        assert!(z_dis(&obs, &none).is_empty());
    }
}
