//! Turning a deterministic schedule into a concrete sensor automaton and
//! labeling function.

use std::collections::{BTreeMap, BTreeSet};

use crate::automata::{EventId, Word};
use crate::error::{Error, Result};
use crate::labeled::{LabeledState, LabeledSystem, TransmitLabel};
use crate::observer::ObserverState;
use crate::synthesis::DeterministicSchedule;

/// A sensor automaton over labeled states. The transmit decision at `x` for
/// `σ` is always the label `x` itself carries for `σ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Policy {
    initial: LabeledState,
    states: BTreeSet<LabeledState>,
    eta: BTreeMap<(LabeledState, EventId), LabeledState>,
}

impl Policy {
    pub fn new(
        sys: &LabeledSystem,
        initial: LabeledState,
        eta: BTreeMap<(LabeledState, EventId), LabeledState>,
    ) -> Result<Policy> {
        let g = sys.plant();
        let render = |x| sys.render(x);
        if !sys.contains(initial) || initial.base != g.initial() {
            return Err(Error::InvalidPolicy(format!(
                "initial `{}` is not a version of the plant's initial state",
                render(initial)
            )));
        }
        for (&(x, e), &t) in &eta {
            if !sys.contains(x) || !sys.contains(t) {
                return Err(Error::InvalidPolicy("labeled state out of range".into()));
            }
            if g.step(x.base, e) != Some(t.base) {
                return Err(Error::InvalidPolicy(format!(
                    "`{} {} {}` does not follow a plant transition",
                    render(x),
                    g.event_name(e),
                    render(t)
                )));
            }
        }
        let states = std::iter::once(initial)
            .chain(eta.iter().flat_map(|(&(x, _), &t)| [x, t]))
            .collect();
        Ok(Policy {
            initial,
            states,
            eta,
        })
    }

    /// Every reachable plant state gets the version labeled `label` throughout.
    pub fn constant(sys: &LabeledSystem, label: TransmitLabel) -> Policy {
        let g = sys.plant();
        let mut eta = BTreeMap::new();
        let mut stack = vec![g.initial()];
        let mut seen = BTreeSet::new();
        while let Some(q) = stack.pop() {
            if !seen.insert(q) {
                continue;
            }
            for &e in g.defined_events(q) {
                let t = g.step(q, e).unwrap();
                eta.insert((sys.uniform(q, label), e), sys.uniform(t, label));
                stack.push(t);
            }
        }
        Policy::new(sys, sys.uniform(g.initial(), label), eta).unwrap()
    }

    pub fn initial(&self) -> LabeledState {
        self.initial
    }

    pub fn states(&self) -> &BTreeSet<LabeledState> {
        &self.states
    }

    pub fn step(&self, x: LabeledState, e: EventId) -> Option<LabeledState> {
        self.eta.get(&(x, e)).copied()
    }

    pub fn transitions(&self) -> impl Iterator<Item = (LabeledState, EventId, LabeledState)> + '_ {
        self.eta.iter().map(|(&(x, e), &t)| (x, e, t))
    }

    pub fn label(&self, sys: &LabeledSystem, x: LabeledState, e: EventId) -> Option<TransmitLabel> {
        if self.states.contains(&x) {
            sys.label_at(x, e)
        } else {
            None
        }
    }

    /// Advance on `e`, reporting whether it is transmitted.
    pub fn advance(
        &self,
        sys: &LabeledSystem,
        x: LabeledState,
        e: EventId,
    ) -> Result<(bool, LabeledState)> {
        let g = sys.plant();
        if g.step(x.base, e).is_none() {
            return Err(Error::UndefinedEvent {
                state: g.state_name(x.base).to_owned(),
                event: g.event_name(e).to_owned(),
            });
        }
        let next = self.step(x, e).ok_or_else(|| Error::PolicyIncomplete {
            state: sys.render(x),
            event: g.event_name(e).to_owned(),
        })?;
        Ok((sys.label_at(x, e) == Some(TransmitLabel::Y), next))
    }
}

/// The receiver's view of `s`: events transmitted along the lockstep run.
pub fn policy_projection(sys: &LabeledSystem, policy: &Policy, s: &[EventId]) -> Result<Word> {
    let g = sys.plant();
    if !g.generates(s) {
        return Err(Error::WordNotInPlant(g.render_word(s)));
    }
    let mut x = policy.initial();
    let mut out = Word::empty();
    for &e in s {
        let (sent, next) = policy.advance(sys, x, e)?;
        if sent {
            out.push(e);
        }
        x = next;
    }
    Ok(out)
}

pub fn transmitted_count(sys: &LabeledSystem, policy: &Policy, s: &[EventId]) -> Result<usize> {
    policy_projection(sys, policy, s).map(|w| w.len())
}

/// Canonically smallest ordering of `d` in which every element reaches the
/// next one by a nonempty string.
pub fn rank(sys: &LabeledSystem, d: &BTreeSet<LabeledState>) -> Result<Vec<LabeledState>> {
    let items: Vec<LabeledState> = d.iter().copied().collect();
    if items.len() <= 1 {
        return Ok(items);
    }
    let g = sys.plant();
    let reach: BTreeMap<_, _> = items
        .iter()
        .map(|x| x.base)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .map(|q| (q, g.reach_plus(q)))
        .collect();
    let step_ok = |a: LabeledState, b: LabeledState| reach[&a.base].contains(&b.base);

    let n = items.len();
    let mut chain: Vec<usize> = Vec::with_capacity(n);
    let mut used = vec![false; n];
    // Explicit backtracking; `next[k]` is the candidate to try at depth k.
    let mut next = vec![0usize; n + 1];
    loop {
        let k = chain.len();
        if k == n {
            return Ok(chain.into_iter().map(|i| items[i]).collect());
        }
        let start = next[k];
        let found = (start..n)
            .find(|&i| !used[i] && chain.last().map_or(true, |&p| step_ok(items[p], items[i])));
        match found {
            Some(i) => {
                next[k] = i + 1;
                used[i] = true;
                chain.push(i);
                next[k + 1] = 0;
            }
            None => {
                let Some(last) = chain.pop() else {
                    return Err(Error::RankUndefined(sys.render_set(&items)));
                };
                used[last] = false;
            }
        }
    }
}

struct Frame {
    state: LabeledState,
    context: ObserverState,
    next_event: usize,
}

/// Extract a policy from `sched`: depth-first over the labeled states of
/// every schedule state, fixing one successor per defined event.
pub fn realize_policy(sys: &LabeledSystem, sched: &DeterministicSchedule) -> Result<Policy> {
    let g = sys.plant();
    let z0 = sched.initial();
    let starts: BTreeSet<LabeledState> = z0
        .members()
        .iter()
        .copied()
        .filter(|x| x.base == g.initial())
        .collect();
    let x0 = match starts.len() {
        0 => {
            return Err(Error::MissingSuccessor {
                state: g.state_name(g.initial()).to_owned(),
                event: "ε".into(),
                set: z0.render(sys),
            })
        }
        1 => *starts.first().unwrap(),
        _ => rank(sys, &starts)?[0],
    };

    let mut eta: BTreeMap<(LabeledState, EventId), LabeledState> = BTreeMap::new();
    for z in sched.states() {
        for &member in z.members() {
            let mut stack = vec![Frame {
                state: member,
                context: z.clone(),
                next_event: 0,
            }];
            while let Some(top) = stack.last_mut() {
                let events = g.defined_events(top.state.base);
                let Some(&e) = events.get(top.next_event) else {
                    stack.pop();
                    continue;
                };
                top.next_event += 1;
                let x = top.state;
                // An edge fixed earlier is reused as is.
                if eta.contains_key(&(x, e)) {
                    continue;
                }
                let context = match sys.label_at(x, e) {
                    Some(TransmitLabel::N) => top.context.clone(),
                    _ => sched
                        .step(&top.context, e)
                        .cloned()
                        .ok_or_else(|| missing(sys, x, e, &top.context))?,
                };
                let d: BTreeSet<LabeledState> = sys
                    .successors(x, e)
                    .filter(|v| context.contains(*v))
                    .collect();
                let target = match d.len() {
                    0 => return Err(missing(sys, x, e, &context)),
                    1 => *d.first().unwrap(),
                    _ => rank(sys, &d)?[0],
                };
                eta.insert((x, e), target);
                stack.push(Frame {
                    state: target,
                    context,
                    next_event: 0,
                });
            }
        }
    }
    Policy::new(sys, x0, eta)
}

fn missing(sys: &LabeledSystem, x: LabeledState, e: EventId, z: &ObserverState) -> Error {
    Error::MissingSuccessor {
        state: sys.render(x),
        event: sys.plant().event_name(e).to_owned(),
        set: z.render(sys),
    }
}
