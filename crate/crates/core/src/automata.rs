//! Plants, words and plain nondeterministic automata.
//!
//! State and event names are interned into dense indices. Indices are
//! assigned in lexicographic name order, so comparing ids compares names.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::ops::Deref;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EventId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateId(pub u32);

impl EventId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl StateId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A finite event sequence. Ordered shortlex: shorter words first, then
/// lexicographically by event.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Word(Vec<EventId>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn push(&mut self, e: EventId) {
        self.0.push(e);
    }

    pub fn pushed(&self, e: EventId) -> Word {
        let mut w = self.clone();
        w.push(e);
        w
    }

    pub fn into_inner(self) -> Vec<EventId> {
        self.0
    }
}

impl Deref for Word {
    type Target = [EventId];

    fn deref(&self) -> &[EventId] {
        &self.0
    }
}

impl From<Vec<EventId>> for Word {
    fn from(v: Vec<EventId>) -> Self {
        Word(v)
    }
}

impl FromIterator<EventId> for Word {
    fn from_iter<I: IntoIterator<Item = EventId>>(iter: I) -> Self {
        Word(iter.into_iter().collect())
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Erase every event outside `observable`.
pub fn project(s: &[EventId], observable: &BTreeSet<EventId>) -> Word {
    s.iter()
        .copied()
        .filter(|e| observable.contains(e))
        .collect()
}

/// Deterministic plant `G = (Q, Σ, δ, q0)` with a partial transition function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plant {
    states: Vec<String>,
    events: Vec<String>,
    delta: Vec<Vec<Option<StateId>>>,
    defined: Vec<Vec<EventId>>,
    initial: StateId,
}

fn check_name(kind: &str, name: &str) -> Result<()> {
    if name.is_empty() || name.chars().any(char::is_whitespace) {
        return Err(Error::InvalidPlant(format!("bad {kind} name `{name}`")));
    }
    Ok(())
}

fn sorted_unique<S: AsRef<str>>(kind: &str, names: &[S]) -> Result<Vec<String>> {
    let mut out: Vec<String> = names.iter().map(|s| s.as_ref().to_owned()).collect();
    for n in &out {
        check_name(kind, n)?;
    }
    out.sort();
    if let Some(w) = out.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::InvalidPlant(format!("duplicate {kind} `{}`", w[0])));
    }
    Ok(out)
}

impl Plant {
    pub fn new<S: AsRef<str>>(
        states: &[S],
        alphabet: &[S],
        initial: &str,
        transitions: &[(S, S, S)],
    ) -> Result<Plant> {
        let states = sorted_unique("state", states)?;
        let events = sorted_unique("event", alphabet)?;
        let mut plant = Plant {
            delta: vec![vec![None; events.len()]; states.len()],
            defined: vec![Vec::new(); states.len()],
            initial: StateId(0),
            states,
            events,
        };
        plant.initial = plant.state_id(initial)?;
        for (src, ev, dst) in transitions {
            let (src, ev, dst) = (src.as_ref(), ev.as_ref(), dst.as_ref());
            let q = plant.state_id(src)?;
            let e = plant.event_id(ev)?;
            let t = plant.state_id(dst)?;
            match plant.delta[q.index()][e.index()] {
                Some(prev) if prev != t => {
                    return Err(Error::InvalidPlant(format!(
                        "two targets for `{src}` on `{ev}`"
                    )))
                }
                _ => plant.delta[q.index()][e.index()] = Some(t),
            }
        }
        for (q, row) in plant.delta.iter().enumerate() {
            plant.defined[q] = row
                .iter()
                .enumerate()
                .filter(|(_, t)| t.is_some())
                .map(|(e, _)| EventId(e as u32))
                .collect();
        }
        Ok(plant)
    }

    pub fn state_id(&self, name: &str) -> Result<StateId> {
        self.states
            .binary_search_by(|s| s.as_str().cmp(name))
            .map(|i| StateId(i as u32))
            .map_err(|_| Error::UnknownState(name.to_owned()))
    }

    pub fn event_id(&self, name: &str) -> Result<EventId> {
        self.events
            .binary_search_by(|s| s.as_str().cmp(name))
            .map(|i| EventId(i as u32))
            .map_err(|_| Error::UnknownEvent(name.to_owned()))
    }

    pub fn state_name(&self, q: StateId) -> &str {
        &self.states[q.index()]
    }

    pub fn event_name(&self, e: EventId) -> &str {
        &self.events[e.index()]
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_events(&self) -> usize {
        self.events.len()
    }

    pub fn states(&self) -> impl Iterator<Item = StateId> + '_ {
        (0..self.states.len() as u32).map(StateId)
    }

    pub fn events(&self) -> impl Iterator<Item = EventId> + '_ {
        (0..self.events.len() as u32).map(EventId)
    }

    pub fn step(&self, q: StateId, e: EventId) -> Option<StateId> {
        self.delta[q.index()][e.index()]
    }

    /// `Σ_q`, in event order.
    pub fn defined_events(&self, q: StateId) -> &[EventId] {
        &self.defined[q.index()]
    }

    pub fn transitions(&self) -> impl Iterator<Item = (StateId, EventId, StateId)> + '_ {
        self.states().flat_map(move |q| {
            self.defined_events(q)
                .iter()
                .map(move |&e| (q, e, self.step(q, e).unwrap()))
        })
    }

    pub fn delta_ext(&self, q: StateId, s: &[EventId]) -> Option<StateId> {
        s.iter().try_fold(q, |q, &e| self.step(q, e))
    }

    pub fn generates(&self, s: &[EventId]) -> bool {
        self.delta_ext(self.initial, s).is_some()
    }

    /// Every generated word of length at most `depth`.
    pub fn language_upto(&self, depth: usize) -> BTreeSet<Word> {
        let mut out = BTreeSet::new();
        let mut frontier = vec![(Word::empty(), self.initial)];
        for level in 0..=depth {
            let mut next = Vec::new();
            for (w, q) in frontier {
                if level < depth {
                    for &e in self.defined_events(q) {
                        next.push((w.pushed(e), self.step(q, e).unwrap()));
                    }
                }
                out.insert(w);
            }
            frontier = next;
        }
        out
    }

    /// States reachable from `from` by a nonempty path.
    pub fn reach_plus(&self, from: StateId) -> BTreeSet<StateId> {
        let mut seen = BTreeSet::new();
        let mut queue: VecDeque<StateId> = self
            .defined_events(from)
            .iter()
            .map(|&e| self.step(from, e).unwrap())
            .collect();
        while let Some(q) = queue.pop_front() {
            if seen.insert(q) {
                queue.extend(
                    self.defined_events(q)
                        .iter()
                        .map(|&e| self.step(q, e).unwrap()),
                );
            }
        }
        seen
    }

    pub fn to_nfa(&self) -> Nfa<StateId> {
        let mut nfa = Nfa::new(self.events());
        for q in self.states() {
            nfa.add_state(q);
        }
        nfa.add_initial(self.initial);
        for (q, e, t) in self.transitions() {
            nfa.add_transition(q, e, t);
        }
        nfa
    }

    pub fn parse_word(&self, text: &str) -> Result<Word> {
        let text = text.trim();
        if text.is_empty() || text == "ε" {
            return Ok(Word::empty());
        }
        text.split_whitespace().map(|t| self.event_id(t)).collect()
    }

    /// Space separated event names, `ε` for the empty word.
    pub fn render_word(&self, s: &[EventId]) -> String {
        self.render_word_with(s, " ")
    }

    pub fn render_word_with(&self, s: &[EventId], sep: &str) -> String {
        if s.is_empty() {
            return "ε".to_owned();
        }
        s.iter()
            .map(|&e| self.event_name(e))
            .collect::<Vec<_>>()
            .join(sep)
    }

    pub fn render_states<'a>(&self, set: impl IntoIterator<Item = &'a StateId>) -> String {
        let names: Vec<&str> = set.into_iter().map(|&q| self.state_name(q)).collect();
        format!("{{{}}}", names.join(","))
    }
}

/// Nondeterministic automaton over arbitrary ordered node values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Nfa<N> {
    states: BTreeSet<N>,
    alphabet: BTreeSet<EventId>,
    trans: BTreeMap<N, BTreeMap<EventId, BTreeSet<N>>>,
    initials: BTreeSet<N>,
}

impl<N: Ord + Clone> Nfa<N> {
    pub fn new(alphabet: impl IntoIterator<Item = EventId>) -> Self {
        Nfa {
            states: BTreeSet::new(),
            alphabet: alphabet.into_iter().collect(),
            trans: BTreeMap::new(),
            initials: BTreeSet::new(),
        }
    }

    pub fn add_state(&mut self, n: N) {
        self.states.insert(n);
    }

    pub fn add_initial(&mut self, n: N) {
        self.states.insert(n.clone());
        self.initials.insert(n);
    }

    pub fn add_transition(&mut self, from: N, e: EventId, to: N) {
        self.alphabet.insert(e);
        self.states.insert(from.clone());
        self.states.insert(to.clone());
        self.trans
            .entry(from)
            .or_default()
            .entry(e)
            .or_default()
            .insert(to);
    }

    pub fn states(&self) -> &BTreeSet<N> {
        &self.states
    }

    pub fn initials(&self) -> &BTreeSet<N> {
        &self.initials
    }

    pub fn alphabet(&self) -> &BTreeSet<EventId> {
        &self.alphabet
    }

    pub fn contains(&self, n: &N) -> bool {
        self.states.contains(n)
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn successors(&self, n: &N, e: EventId) -> Option<&BTreeSet<N>> {
        self.trans.get(n).and_then(|m| m.get(&e))
    }

    /// Outgoing edges of `n`, grouped by event.
    pub fn edges<'a>(&'a self, n: &N) -> impl Iterator<Item = (EventId, &'a BTreeSet<N>)> + 'a {
        self.trans
            .get(n)
            .into_iter()
            .flat_map(|m| m.iter().map(|(e, t)| (*e, t)))
    }

    pub fn transitions(&self) -> impl Iterator<Item = (&N, EventId, &N)> + '_ {
        self.trans.iter().flat_map(|(from, m)| {
            m.iter()
                .flat_map(move |(e, ts)| ts.iter().map(move |t| (from, *e, t)))
        })
    }

    pub fn transition_count(&self) -> usize {
        self.trans
            .values()
            .flat_map(|m| m.values())
            .map(BTreeSet::len)
            .sum()
    }

    pub fn reachable(&self) -> BTreeSet<N> {
        let mut seen: BTreeSet<N> = BTreeSet::new();
        let mut stack: Vec<N> = self.initials.iter().cloned().collect();
        while let Some(n) = stack.pop() {
            if !seen.insert(n.clone()) {
                continue;
            }
            for (_, ts) in self.edges(&n) {
                stack.extend(ts.iter().filter(|t| !seen.contains(*t)).cloned());
            }
        }
        seen
    }

    /// Restrict to `keep`, then drop whatever is no longer reachable.
    pub fn restrict(&self, keep: &BTreeSet<N>) -> Nfa<N> {
        let mut cut = Nfa::new(self.alphabet.iter().copied());
        for n in self.states.iter().filter(|n| keep.contains(*n)) {
            cut.add_state(n.clone());
        }
        for n in self.initials.iter().filter(|n| keep.contains(*n)) {
            cut.add_initial(n.clone());
        }
        for (from, e, to) in self.transitions() {
            if keep.contains(from) && keep.contains(to) {
                cut.add_transition(from.clone(), e, to.clone());
            }
        }
        let live = cut.reachable();
        if live.len() == cut.states.len() {
            return cut;
        }
        let mut out = Nfa::new(self.alphabet.iter().copied());
        for n in &live {
            out.add_state(n.clone());
        }
        for n in cut.initials.iter().filter(|n| live.contains(*n)) {
            out.add_initial(n.clone());
        }
        for (from, e, to) in cut.transitions() {
            if live.contains(from) {
                out.add_transition(from.clone(), e, to.clone());
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn w(p: &Plant, s: &str) -> Word {
        p.parse_word(s).unwrap()
    }

    #[test]
    fn extended_transitions() {
        let g = fixtures::running_example();
        let q0 = g.state_id("q0").unwrap();
        let q5 = g.state_id("q5").unwrap();
        assert_eq!(g.delta_ext(q0, &w(&g, "σ2 σ2")), g.state_id("q2").ok());
        assert_eq!(g.delta_ext(q0, &[]), Some(q0));
        assert_eq!(g.delta_ext(q5, &w(&g, "σ1")), None);
    }

    #[test]
    fn defined_events_per_state() {
        let g = fixtures::running_example();
        let names = |q: &str| -> Vec<&str> {
            g.defined_events(g.state_id(q).unwrap())
                .iter()
                .map(|&e| g.event_name(e))
                .collect()
        };
        assert_eq!(names("q0"), ["σ1", "σ2", "σ3"]);
        assert!(names("q5").is_empty());
        assert_eq!(names("q4"), ["σ3"]);
    }

    #[test]
    fn bounded_language() {
        let g = fixtures::running_example();
        assert_eq!(g.language_upto(0), BTreeSet::from([Word::empty()]));
        let one: Vec<String> = g
            .language_upto(1)
            .iter()
            .map(|s| g.render_word(s))
            .collect();
        assert_eq!(one, ["ε", "σ1", "σ2", "σ3"]);

        let lone = Plant::new(&["a"], &["e"], "a", &[]).unwrap();
        assert_eq!(lone.language_upto(5), BTreeSet::from([Word::empty()]));
    }

    #[test]
    fn projection_erases() {
        let g = fixtures::running_example();
        let s2 = BTreeSet::from([g.event_id("σ2").unwrap()]);
        assert_eq!(project(&w(&g, "σ1 σ2 σ1"), &s2), w(&g, "σ2"));
        let all: BTreeSet<_> = g.events().collect();
        assert_eq!(project(&w(&g, "σ1 σ2"), &all), w(&g, "σ1 σ2"));
        assert_eq!(project(&[], &all), Word::empty());
    }

    #[test]
    fn reachability() {
        let g = fixtures::running_example();
        assert_eq!(g.to_nfa().reachable().len(), 6);

        let mut lone: Nfa<u8> = Nfa::new([]);
        lone.add_initial(0);
        assert_eq!(lone.reachable(), BTreeSet::from([0]));

        let mut island: Nfa<u8> = Nfa::new([]);
        island.add_initial(0);
        island.add_transition(0, EventId(0), 1);
        island.add_transition(2, EventId(0), 3);
        assert_eq!(island.reachable(), BTreeSet::from([0, 1]));
    }

    #[test]
    fn restriction_drops_cut_off_nodes() {
        let mut chain: Nfa<char> = Nfa::new([EventId(0)]);
        chain.add_initial('a');
        chain.add_transition('a', EventId(0), 'b');
        chain.add_transition('b', EventId(0), 'c');

        let cut = chain.restrict(&BTreeSet::from(['a', 'c']));
        assert_eq!(cut.states(), &BTreeSet::from(['a']));
        assert_eq!(cut.transition_count(), 0);

        assert_eq!(chain.restrict(chain.states()), chain);
        assert!(chain.restrict(&BTreeSet::new()).is_empty());
    }

    #[test]
    fn words_order_shortlex() {
        let a = Word::from(vec![EventId(1)]);
        let b = Word::from(vec![EventId(0), EventId(0)]);
        assert!(Word::empty() < a && a < b);
    }

    #[test]
    fn rejects_nondeterminism_and_bad_names() {
        let dup = Plant::new(
            &["a", "b"],
            &["e"],
            "a",
            &[("a", "e", "a"), ("a", "e", "b")],
        );
        assert!(matches!(dup, Err(Error::InvalidPlant(_))));
        assert!(matches!(
            Plant::new(&["a"], &["e"], "z", &[]),
            Err(Error::UnknownState(_))
        ));
        assert!(Plant::new(&["a b"], &["e"], "a b", &[]).is_err());
    }
}
