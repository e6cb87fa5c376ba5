//! Property pruning, the consistency fixpoint, and greedy extraction of a
//! deterministic schedule that suppresses as much as it can.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::automata::{EventId, Nfa};
use crate::error::{Error, Result};
use crate::labeled::{LabeledState, LabeledSystem, TransmitLabel};
use crate::observer::{DynamicObserver, ObserverState};
use crate::property::{z_dis, IsProperty};

/// A sub-automaton of the full observer. Consistency is always judged
/// against the full observer, which callers pass alongside.
pub type PrunedObserver = Nfa<ObserverState>;

pub fn prune_dissatisfying(obs: &DynamicObserver, prop: &dyn IsProperty) -> PrunedObserver {
    let bad = z_dis(obs, prop);
    let keep: BTreeSet<ObserverState> = obs.states().difference(&bad).cloned().collect();
    obs.restrict(&keep)
}

/// False iff some event leads somewhere in `full` but nowhere in `pruned`.
pub fn is_consistent(full: &DynamicObserver, pruned: &PrunedObserver, z: &ObserverState) -> bool {
    full.edges(z).all(|(e, targets)| {
        targets.is_empty() || pruned.successors(z, e).is_some_and(|t| !t.is_empty())
    })
}

/// One application of the pruning operator: keep consistent states only.
pub fn consistency_step(full: &DynamicObserver, g: &PrunedObserver) -> PrunedObserver {
    let keep: BTreeSet<ObserverState> = g
        .states()
        .iter()
        .filter(|z| is_consistent(full, g, z))
        .cloned()
        .collect();
    g.restrict(&keep)
}

/// Iterate [`consistency_step`] until nothing changes.
pub fn consistency_fixpoint(full: &DynamicObserver, g0: &PrunedObserver) -> Result<PrunedObserver> {
    let mut g = g0.clone();
    loop {
        let next = consistency_step(full, &g);
        if next.states().len() == g.states().len() {
            break;
        }
        g = next;
    }
    if g.initials().is_empty() {
        return Err(Error::Infeasible(
            "no initial observer state survives pruning".into(),
        ));
    }
    Ok(g)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubAutomaton {
    pub root: ObserverState,
    pub states: BTreeSet<ObserverState>,
}

pub fn split_sub_automata(gstar: &PrunedObserver) -> Vec<SubAutomaton> {
    gstar
        .initials()
        .iter()
        .map(|root| {
            let mut states = BTreeSet::new();
            let mut stack = vec![root.clone()];
            while let Some(z) = stack.pop() {
                if !states.insert(z.clone()) {
                    continue;
                }
                for (_, ts) in gstar.edges(&z) {
                    stack.extend(ts.iter().filter(|t| !states.contains(*t)).cloned());
                }
            }
            SubAutomaton {
                root: root.clone(),
                states,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum NzMode {
    /// Count members that suppress some event whose successor stays in the set.
    #[default]
    Labeled,
    /// Ignore the label: any in-set successor counts.
    Unlabeled,
}

/// Number of members owning an in-set transition (suppressed ones only, by default).
pub fn count_nontransmitted(sys: &LabeledSystem, z: &ObserverState, mode: NzMode) -> usize {
    z.members()
        .iter()
        .filter(|&&u| {
            sys.plant().defined_events(u.base).iter().any(|&e| {
                (mode == NzMode::Unlabeled || sys.label_at(u, e) == Some(TransmitLabel::N))
                    && sys.successors(u, e).any(|v| z.contains(v))
            })
        })
        .count()
}

/// Deterministic restriction of G*: one successor per (state, event).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeterministicSchedule {
    initial: ObserverState,
    /// Discovery order; `order[0]` is the initial state.
    order: Vec<ObserverState>,
    trans: BTreeMap<(ObserverState, EventId), ObserverState>,
}

impl DeterministicSchedule {
    pub fn initial(&self) -> &ObserverState {
        &self.initial
    }

    pub fn states(&self) -> &[ObserverState] {
        &self.order
    }

    pub fn step(&self, z: &ObserverState, e: EventId) -> Option<&ObserverState> {
        self.trans.get(&(z.clone(), e))
    }

    pub fn transitions(&self) -> impl Iterator<Item = (&ObserverState, EventId, &ObserverState)> {
        self.trans.iter().map(|((z, e), t)| (z, *e, t))
    }
}

/// Pin for the initial observer state of the schedule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InitialPin {
    State(ObserverState),
    /// Best-scoring surviving initial that contains this labeled state.
    Member(LabeledState),
}

fn score(sys: &LabeledSystem, sub: &SubAutomaton, mode: NzMode) -> usize {
    sub.states
        .iter()
        .map(|z| count_nontransmitted(sys, z, mode))
        .sum()
}

/// First element with the strictly largest key; inputs arrive in canonical order.
fn best_by<'a, T>(
    items: impl IntoIterator<Item = &'a T>,
    key: impl Fn(&T) -> usize,
) -> Option<&'a T> {
    let mut best: Option<(&T, usize)> = None;
    for it in items {
        let k = key(it);
        if best.map_or(true, |(_, b)| k > b) {
            best = Some((it, k));
        }
    }
    best.map(|(it, _)| it)
}

pub fn extract_min_transmit(
    sys: &LabeledSystem,
    gstar: &PrunedObserver,
    pin: Option<&InitialPin>,
    mode: NzMode,
) -> Result<DeterministicSchedule> {
    if gstar.initials().is_empty() {
        return Err(Error::Infeasible(
            "pruned observer has no initial state".into(),
        ));
    }
    let subs = split_sub_automata(gstar);
    let eligible: Vec<&SubAutomaton> = match pin {
        None => subs.iter().collect(),
        Some(InitialPin::State(z)) => subs.iter().filter(|s| &s.root == z).collect(),
        Some(InitialPin::Member(m)) => subs.iter().filter(|s| s.root.contains(*m)).collect(),
    };
    let chosen = best_by(eligible.iter().copied(), |s| score(sys, s, mode)).ok_or_else(|| {
        Error::UnknownInitial(match pin {
            Some(InitialPin::State(z)) => z.render(sys),
            Some(InitialPin::Member(m)) => sys.render(*m),
            None => String::new(),
        })
    })?;

    let initial = chosen.root.clone();
    let mut order = vec![initial.clone()];
    let mut seen = BTreeSet::from([initial.clone()]);
    let mut trans = BTreeMap::new();
    let mut queue = VecDeque::from([initial.clone()]);
    while let Some(z) = queue.pop_front() {
        for (e, targets) in gstar.edges(&z) {
            let Some(next) = best_by(targets, |t| count_nontransmitted(sys, t, mode)) else {
                continue;
            };
            trans.insert((z.clone(), e), next.clone());
            if seen.insert(next.clone()) {
                order.push(next.clone());
                queue.push_back(next.clone());
            }
        }
    }
    Ok(DeterministicSchedule {
        initial,
        order,
        trans,
    })
}
