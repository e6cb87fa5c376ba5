//! The label-augmented system: every plant state paired with a transmit
//! decision for each event defined there.

use std::collections::BTreeSet;
use std::fmt;

use crate::automata::{EventId, Nfa, Plant, StateId, Word};
use crate::error::{Error, Result};

pub const DEFAULT_EVENT_LIMIT: usize = 16;
const HARD_EVENT_LIMIT: usize = 31;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TransmitLabel {
    N,
    Y,
}

impl fmt::Display for TransmitLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TransmitLabel::N => "N",
            TransmitLabel::Y => "Y",
        })
    }
}

/// A plant state with one label per defined event.
///
/// `labels` packs the label vector most-significant bit first in event
/// order (1 = Y), so the derived ordering is `(base, bitstring)` with N < Y.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LabeledState {
    pub base: StateId,
    pub labels: u32,
}

#[derive(Debug, Clone)]
pub struct LabeledSystem {
    plant: Plant,
    offsets: Vec<usize>,
}

impl LabeledSystem {
    pub fn new(plant: Plant) -> Result<Self> {
        Self::with_event_limit(plant, DEFAULT_EVENT_LIMIT)
    }

    pub fn with_event_limit(plant: Plant, limit: usize) -> Result<Self> {
        let limit = limit.min(HARD_EVENT_LIMIT);
        let mut offsets = Vec::with_capacity(plant.num_states() + 1);
        let mut total = 0usize;
        for q in plant.states() {
            let n = plant.defined_events(q).len();
            if n > limit {
                return Err(Error::AlphabetTooLarge {
                    state: plant.state_name(q).to_owned(),
                    count: n,
                    limit,
                });
            }
            offsets.push(total);
            total += 1 << n;
        }
        offsets.push(total);
        Ok(LabeledSystem { plant, offsets })
    }

    pub fn plant(&self) -> &Plant {
        &self.plant
    }

    /// Number of labeled states, `Σ_q 2^|Σ_q|`.
    pub fn len(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn num_versions(&self, q: StateId) -> usize {
        self.offsets[q.index() + 1] - self.offsets[q.index()]
    }

    pub fn versions(&self, q: StateId) -> impl Iterator<Item = LabeledState> {
        (0..self.num_versions(q) as u32).map(move |labels| LabeledState { base: q, labels })
    }

    pub fn iter(&self) -> impl Iterator<Item = LabeledState> + '_ {
        self.plant.states().flat_map(|q| self.versions(q))
    }

    pub fn initials(&self) -> impl Iterator<Item = LabeledState> {
        self.versions(self.plant.initial())
    }

    /// Dense position of `ls` in canonical order.
    pub fn index_of(&self, ls: LabeledState) -> usize {
        self.offsets[ls.base.index()] + ls.labels as usize
    }

    pub fn contains(&self, ls: LabeledState) -> bool {
        ls.base.index() < self.plant.num_states()
            && (ls.labels as usize) < self.num_versions(ls.base)
    }

    /// The version of `q` whose labels are given by `label`.
    pub fn version(&self, q: StateId, label: impl Fn(EventId) -> TransmitLabel) -> LabeledState {
        let labels = self.plant.defined_events(q).iter().fold(0u32, |acc, &e| {
            (acc << 1) | (label(e) == TransmitLabel::Y) as u32
        });
        LabeledState { base: q, labels }
    }

    pub fn uniform(&self, q: StateId, label: TransmitLabel) -> LabeledState {
        self.version(q, |_| label)
    }

    pub fn label_at(&self, ls: LabeledState, e: EventId) -> Option<TransmitLabel> {
        let defined = self.plant.defined_events(ls.base);
        let i = defined.binary_search(&e).ok()?;
        let bit = (ls.labels >> (defined.len() - 1 - i)) & 1;
        Some(if bit == 1 {
            TransmitLabel::Y
        } else {
            TransmitLabel::N
        })
    }

    pub fn label_of(&self, ls: LabeledState, e: EventId) -> Result<TransmitLabel> {
        self.label_at(ls, e).ok_or_else(|| Error::UndefinedEvent {
            state: self.render(ls),
            event: self.plant.event_name(e).to_owned(),
        })
    }

    /// Defined events paired with their labels, in event order.
    pub fn label_vector(&self, ls: LabeledState) -> Vec<(EventId, TransmitLabel)> {
        self.plant
            .defined_events(ls.base)
            .iter()
            .map(|&e| (e, self.label_at(ls, e).unwrap()))
            .collect()
    }

    pub fn events_labeled(
        &self,
        ls: LabeledState,
        label: TransmitLabel,
    ) -> impl Iterator<Item = EventId> + '_ {
        self.label_vector(ls)
            .into_iter()
            .filter(move |(_, l)| *l == label)
            .map(|(e, _)| e)
    }

    /// Every version of the plant successor; labels are free to change.
    pub fn successors(&self, ls: LabeledState, e: EventId) -> impl Iterator<Item = LabeledState> {
        let next = self.plant.step(ls.base, e);
        let count = next.map_or(0, |q| self.num_versions(q) as u32);
        (0..count).map(move |labels| LabeledState {
            base: next.unwrap(),
            labels,
        })
    }

    /// States reachable from `seed` through steps suppressed at their source.
    pub fn unobservable_reach(&self, seed: LabeledState) -> BTreeSet<LabeledState> {
        let mut seen = BTreeSet::from([seed]);
        let mut work = vec![seed];
        while let Some(u) = work.pop() {
            for e in self.events_labeled(u, TransmitLabel::N) {
                for v in self.successors(u, e) {
                    if seen.insert(v) {
                        work.push(v);
                    }
                }
            }
        }
        seen
    }

    /// Keep the events labeled Y at their step's source.
    pub fn tilde_project(&self, steps: &[(LabeledState, EventId)]) -> Word {
        steps
            .iter()
            .filter(|&&(ls, e)| self.label_at(ls, e) == Some(TransmitLabel::Y))
            .map(|&(_, e)| e)
            .collect()
    }

    pub fn to_nfa(&self) -> Nfa<LabeledState> {
        let mut nfa = Nfa::new(self.plant.events());
        for ls in self.iter() {
            nfa.add_state(ls);
            for &e in self.plant.defined_events(ls.base) {
                for t in self.successors(ls, e) {
                    nfa.add_transition(ls, e, t);
                }
            }
        }
        for ls in self.initials() {
            nfa.add_initial(ls);
        }
        nfa
    }

    /// `q0NNY` style rendering.
    pub fn render(&self, ls: LabeledState) -> String {
        let mut s = self.plant.state_name(ls.base).to_owned();
        for (_, l) in self.label_vector(ls) {
            s.push_str(if l == TransmitLabel::Y { "Y" } else { "N" });
        }
        s
    }

    pub fn render_set<'a>(&self, set: impl IntoIterator<Item = &'a LabeledState>) -> String {
        let parts: Vec<String> = set.into_iter().map(|&ls| self.render(ls)).collect();
        format!("{{{}}}", parts.join(","))
    }

    pub fn parse_state(&self, text: &str) -> Result<LabeledState> {
        let mut found = Vec::new();
        for q in self.plant.states() {
            let Some(rest) = text.strip_prefix(self.plant.state_name(q)) else {
                continue;
            };
            let n = self.plant.defined_events(q).len();
            if rest.len() != n || !rest.bytes().all(|b| b == b'Y' || b == b'N') {
                continue;
            }
            let labels = rest
                .bytes()
                .fold(0u32, |acc, b| (acc << 1) | (b == b'Y') as u32);
            found.push(LabeledState { base: q, labels });
        }
        match found.as_slice() {
            [one] => Ok(*one),
            [] => Err(Error::UnknownState(text.to_owned())),
            _ => Err(Error::InvalidPlant(format!(
                "labeled state `{text}` is ambiguous"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn sys() -> LabeledSystem {
        LabeledSystem::new(fixtures::running_example()).unwrap()
    }

    fn set(sys: &LabeledSystem, names: &[&str]) -> BTreeSet<LabeledState> {
        names.iter().map(|n| sys.parse_state(n).unwrap()).collect()
    }

    #[test]
    fn counts_versions() {
        let sys = sys();
        assert_eq!(sys.len(), 17);
        let per: Vec<usize> = sys.plant().states().map(|q| sys.num_versions(q)).collect();
        assert_eq!(per, [8, 2, 2, 2, 2, 1]);

        let lone = LabeledSystem::new(Plant::new(&["a"], &[], "a", &[]).unwrap()).unwrap();
        assert_eq!(lone.len(), 1);
        assert_eq!(lone.to_nfa().transition_count(), 0);

        let chain =
            LabeledSystem::new(Plant::new(&["a", "b"], &["σ"], "a", &[("a", "σ", "b")]).unwrap())
                .unwrap();
        let edges: Vec<String> = chain
            .to_nfa()
            .transitions()
            .map(|(f, _, t)| format!("{}>{}", chain.render(*f), chain.render(*t)))
            .collect();
        assert_eq!(edges, ["aN>b", "aY>b"]);
    }

    #[test]
    fn event_limit() {
        let g = fixtures::running_example();
        assert!(matches!(
            LabeledSystem::with_event_limit(g, 2),
            Err(Error::AlphabetTooLarge { count: 3, .. })
        ));
    }

    #[test]
    fn labels() {
        let sys = sys();
        let g = sys.plant();
        let x = sys.parse_state("q0NNY").unwrap();
        let e = |n| g.event_id(n).unwrap();
        assert_eq!(sys.label_of(x, e("σ3")), Ok(TransmitLabel::Y));
        assert_eq!(sys.label_of(x, e("σ1")), Ok(TransmitLabel::N));
        let q5 = sys.parse_state("q5").unwrap();
        assert!(matches!(
            sys.label_of(q5, e("σ1")),
            Err(Error::UndefinedEvent { .. })
        ));
    }

    #[test]
    fn canonical_order_and_rendering() {
        let sys = sys();
        let all: Vec<String> = sys.iter().map(|ls| sys.render(ls)).collect();
        assert_eq!(all[0], "q0NNN");
        assert_eq!(all[1], "q0NNY");
        assert_eq!(all[7], "q0YYY");
        assert_eq!(all[16], "q5");
        let mut sorted: Vec<LabeledState> = sys.iter().collect();
        sorted.sort();
        assert_eq!(sorted, sys.iter().collect::<Vec<_>>());
        for ls in sys.iter() {
            assert_eq!(sys.parse_state(&sys.render(ls)), Ok(ls));
        }
    }

    #[test]
    fn unobservable_reach_examples() {
        let sys = sys();
        let q = |n| sys.parse_state(n).unwrap();
        assert_eq!(
            sys.unobservable_reach(q("q0NNY")),
            set(&sys, &["q0NNY", "q5", "q1Y", "q1N", "q2Y", "q2N"])
        );
        assert_eq!(sys.unobservable_reach(q("q2Y")), set(&sys, &["q2Y"]));
        assert_eq!(
            sys.unobservable_reach(q("q3N")),
            set(&sys, &["q3N", "q4N", "q4Y"])
        );
    }

    #[test]
    fn tilde_projection() {
        let sys = sys();
        let g = sys.plant();
        let q = |n| sys.parse_state(n).unwrap();
        let e = |n| g.event_id(n).unwrap();
        let w = sys.tilde_project(&[(q("q0NNY"), e("σ2")), (q("q1Y"), e("σ2"))]);
        assert_eq!(g.render_word(&w), "σ2");
        assert!(sys.tilde_project(&[]).is_empty());
        assert_eq!(
            g.render_word(&sys.tilde_project(&[(q("q0YYY"), e("σ1"))])),
            "σ1"
        );
    }
}
