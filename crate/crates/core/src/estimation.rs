//! Receiver state estimates, by brute force and through the product of the
//! policy with the labeled system, plus bounded checks tying them together.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use crate::automata::{EventId, Nfa, StateId, Word};
use crate::error::{Error, Result};
use crate::labeled::{LabeledState, LabeledSystem, TransmitLabel};
use crate::observer::{in_max_s_core, xi_contains, Explorer, ObserverState, DEFAULT_STATE_BUDGET};
use crate::property::{underlying_states, IsProperty};
use crate::realization::{policy_projection, Policy};

/// A policy position paired with a labeled-system position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProductState {
    pub sensor: LabeledState,
    pub aug: LabeledState,
}

pub type ProductObserverState = BTreeSet<ProductState>;

/// The version of the plant state `q` whose labels agree with the policy at `x`.
fn matching_version(
    sys: &LabeledSystem,
    policy: &Policy,
    x: LabeledState,
    q: StateId,
) -> Option<LabeledState> {
    let mut found = sys.versions(q).filter(|&v| {
        sys.plant()
            .defined_events(q)
            .iter()
            .all(|&e| policy.label(sys, x, e) == sys.label_at(v, e))
    });
    let first = found.next()?;
    assert!(
        found.next().is_none(),
        "policy labels at {} admit two versions of {}",
        sys.render(x),
        sys.plant().state_name(q)
    );
    Some(first)
}

pub fn build_product(sys: &LabeledSystem, policy: &Policy) -> Nfa<ProductState> {
    let g = sys.plant();
    let mut nfa = Nfa::new(g.events());
    let x0 = policy.initial();
    let Some(a0) = matching_version(sys, policy, x0, g.initial()) else {
        return nfa;
    };
    let v0 = ProductState {
        sensor: x0,
        aug: a0,
    };
    nfa.add_initial(v0);
    let mut seen = BTreeSet::from([v0]);
    let mut queue = VecDeque::from([v0]);
    while let Some(v) = queue.pop_front() {
        for &e in g.defined_events(v.aug.base) {
            let Some(x) = policy.step(v.sensor, e) else {
                continue;
            };
            let q = g.step(v.aug.base, e).unwrap();
            let Some(aug) = matching_version(sys, policy, x, q) else {
                continue;
            };
            let t = ProductState { sensor: x, aug };
            nfa.add_transition(v, e, t);
            if seen.insert(t) {
                queue.push_back(t);
            }
        }
    }
    nfa
}

/// Deterministic observer of the product: what the receiver knows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductObserver {
    states: Vec<ProductObserverState>,
    trans: BTreeMap<(usize, EventId), usize>,
}

impl ProductObserver {
    pub fn initial(&self) -> Option<usize> {
        (!self.states.is_empty()).then_some(0)
    }

    pub fn state(&self, h: usize) -> &ProductObserverState {
        &self.states[h]
    }

    pub fn states(&self) -> &[ProductObserverState] {
        &self.states
    }

    pub fn step(&self, h: usize, e: EventId) -> Option<usize> {
        self.trans.get(&(h, e)).copied()
    }

    pub fn run(&self, w: &[EventId]) -> Option<usize> {
        w.iter().try_fold(self.initial()?, |h, &e| self.step(h, e))
    }

    pub fn transitions(&self) -> impl Iterator<Item = (usize, EventId, usize)> + '_ {
        self.trans.iter().map(|(&(h, e), &t)| (h, e, t))
    }
}

fn suppressed_closure(
    sys: &LabeledSystem,
    policy: &Policy,
    product: &Nfa<ProductState>,
    seed: impl IntoIterator<Item = ProductState>,
) -> ProductObserverState {
    let mut out = BTreeSet::new();
    let mut stack: Vec<ProductState> = seed.into_iter().collect();
    while let Some(v) = stack.pop() {
        if !out.insert(v) {
            continue;
        }
        for (e, ts) in product.edges(&v) {
            if policy.label(sys, v.sensor, e) == Some(TransmitLabel::N) {
                stack.extend(ts.iter().copied());
            }
        }
    }
    out
}

pub fn observer_of_product(
    sys: &LabeledSystem,
    product: &Nfa<ProductState>,
    policy: &Policy,
) -> ProductObserver {
    let mut obs = ProductObserver {
        states: Vec::new(),
        trans: BTreeMap::new(),
    };
    if product.initials().is_empty() {
        return obs;
    }
    let h0 = suppressed_closure(sys, policy, product, product.initials().iter().copied());
    let mut index: HashMap<ProductObserverState, usize> = HashMap::from([(h0.clone(), 0)]);
    obs.states.push(h0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(h) = queue.pop_front() {
        for e in sys.plant().events() {
            let next: Vec<ProductState> = obs.states[h]
                .iter()
                .filter(|v| policy.label(sys, v.sensor, e) == Some(TransmitLabel::Y))
                .flat_map(|v| product.successors(v, e).into_iter().flatten().copied())
                .collect();
            if next.is_empty() {
                continue;
            }
            let t = suppressed_closure(sys, policy, product, next);
            let id = match index.get(&t) {
                Some(&id) => id,
                None => {
                    let id = obs.states.len();
                    index.insert(t.clone(), id);
                    obs.states.push(t);
                    queue.push_back(id);
                    id
                }
            };
            obs.trans.insert((h, e), id);
        }
    }
    obs
}

/// Labeled-system components of `h`.
pub fn i2(h: &ProductObserverState) -> ObserverState {
    ObserverState::new(h.iter().map(|v| v.aug))
}

pub fn i1(h: &ProductObserverState) -> BTreeSet<StateId> {
    underlying_states(i2(h).members())
}

/// Endpoints of every generated `t`, at most `depth` long, whose projection
/// matches that of `s`.
pub fn estimate_bruteforce(
    sys: &LabeledSystem,
    policy: &Policy,
    s: &[EventId],
    depth: usize,
) -> Result<BTreeSet<StateId>> {
    let g = sys.plant();
    let target = policy_projection(sys, policy, s)?;
    let mut out = BTreeSet::new();
    // Deepest remaining budget already explored per (policy state, matched).
    let mut best: HashMap<(LabeledState, usize), usize> = HashMap::new();
    let mut stack = vec![(policy.initial(), 0usize, depth)];
    while let Some((x, matched, left)) = stack.pop() {
        match best.get(&(x, matched)) {
            Some(&b) if b >= left => continue,
            _ => {
                best.insert((x, matched), left);
            }
        }
        if matched == target.len() {
            out.insert(x.base);
        }
        if left == 0 {
            continue;
        }
        for &e in g.defined_events(x.base) {
            let (sent, next) = policy.advance(sys, x, e)?;
            let m = if sent {
                if target.get(matched) != Some(&e) {
                    continue;
                }
                matched + 1
            } else {
                matched
            };
            stack.push((next, m, left - 1));
        }
    }
    Ok(out)
}

/// Enumeration bound that catches every distinct endpoint for `s`: between
/// two transmissions a shortest suppressed run never repeats a policy
/// position. Never below `|s|` plus the labeled-state count.
pub fn estimation_horizon(
    sys: &LabeledSystem,
    policy: &Policy,
    s_len: usize,
    proj_len: usize,
) -> usize {
    let positions = policy.states().len();
    (s_len + sys.len()).max(proj_len + (proj_len + 1) * positions)
}

pub fn estimate_exact(
    sys: &LabeledSystem,
    policy: &Policy,
    s: &[EventId],
) -> Result<BTreeSet<StateId>> {
    let n = policy_projection(sys, policy, s)?.len();
    estimate_bruteforce(sys, policy, s, estimation_horizon(sys, policy, s.len(), n))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EstimateReport {
    pub word: Word,
    pub projection: Word,
    pub estimate: BTreeSet<StateId>,
    pub property_ok: bool,
}

pub fn estimate_report(
    sys: &LabeledSystem,
    policy: &Policy,
    prop: &dyn IsProperty,
    s: &[EventId],
) -> Result<EstimateReport> {
    let estimate = estimate_exact(sys, policy, s)?;
    Ok(EstimateReport {
        word: s.iter().copied().collect(),
        projection: policy_projection(sys, policy, s)?,
        property_ok: prop.holds(&estimate),
        estimate,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Check {
    Thm1,
    Prop1,
    Problem1,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Check::Thm1 => "THM1",
            Check::Prop1 => "PROP1",
            Check::Problem1 => "PROBLEM1",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub word: Word,
    pub expected: String,
    pub got: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckReport {
    pub check: Check,
    pub words: usize,
    pub depth: usize,
    pub failure: Option<Failure>,
}

impl CheckReport {
    pub fn ok(&self) -> bool {
        self.failure.is_none()
    }

    /// One report line, as printed by `verify`.
    pub fn line(&self, sys: &LabeledSystem) -> String {
        match &self.failure {
            None => format!(
                "{} ok words={} depth={}",
                self.check, self.words, self.depth
            ),
            Some(f) => format!(
                "FAIL {} word={} expected={} got={}",
                self.check,
                sys.plant().render_word_with(&f.word, "."),
                f.expected,
                f.got
            ),
        }
    }
}

/// Observer estimate equals the brute-force estimate for every word.
pub fn check_thm1(sys: &LabeledSystem, policy: &Policy, depth: usize) -> Result<CheckReport> {
    let g = sys.plant();
    let obs = observer_of_product(sys, &build_product(sys, policy), policy);
    let mut words = 0;
    for s in g.language_upto(depth) {
        words += 1;
        let w = policy_projection(sys, policy, &s)?;
        let expected = estimate_bruteforce(
            sys,
            policy,
            &s,
            estimation_horizon(sys, policy, s.len(), w.len()),
        )?;
        let got = obs.run(&w).map(|h| i1(obs.state(h)));
        if got.as_ref() != Some(&expected) {
            return Ok(CheckReport {
                check: Check::Thm1,
                words,
                depth,
                failure: Some(Failure {
                    word: s,
                    expected: g.render_states(&expected),
                    got: got.map_or("undefined".into(), |e| g.render_states(&e)),
                }),
            });
        }
    }
    Ok(CheckReport {
        check: Check::Thm1,
        words,
        depth,
        failure: None,
    })
}

/// The receiver's labeled knowledge is always among the dynamic observer's
/// candidate states for the same observation.
pub fn check_prop1(sys: &LabeledSystem, policy: &Policy, depth: usize) -> Result<CheckReport> {
    check_prop1_with_budget(sys, policy, depth, DEFAULT_STATE_BUDGET)
}

pub fn check_prop1_with_budget(
    sys: &LabeledSystem,
    policy: &Policy,
    depth: usize,
    budget: usize,
) -> Result<CheckReport> {
    let g = sys.plant();
    let obs = observer_of_product(sys, &build_product(sys, policy), policy);
    let report = |words, failure| CheckReport {
        check: Check::Prop1,
        words,
        depth,
        failure,
    };
    let Some(h0) = obs.initial() else {
        return Ok(report(0, None));
    };
    // Induction along the receiver's own knowledge: if the previous
    // knowledge is a candidate and the step is an observer edge, the new
    // knowledge is a candidate too. Only when that chain breaks is the
    // full candidate family for the word computed.
    let mut ex = Explorer::new(sys);
    let mut edge_ok: HashMap<(usize, EventId), bool> = HashMap::new();
    let mut words = 0;
    let mut queue = VecDeque::from([(Word::empty(), None::<usize>, h0)]);
    while let Some((w, parent, h)) = queue.pop_front() {
        words += 1;
        let known = i2(obs.state(h));
        let chained = match parent {
            None => sys
                .initials()
                .map(|q0| in_max_s_core(sys, &BTreeSet::from([q0]), &known))
                .collect::<Result<Vec<_>>>()?
                .contains(&true),
            Some(p) => {
                let e = *w.last().unwrap();
                match edge_ok.get(&(p, e)) {
                    Some(&ok) => ok,
                    None => {
                        let ok = xi_contains(sys, &i2(obs.state(p)), e, &known)?;
                        edge_ok.insert((p, e), ok);
                        ok
                    }
                }
            }
        };
        if !chained {
            let family = candidate_family(&mut ex, &w, budget)?;
            if !family.contains(&known) {
                return Ok(report(
                    words,
                    Some(Failure {
                        word: w,
                        expected: format!("one of {} observer states", family.len()),
                        got: known.render(sys),
                    }),
                ));
            }
        }
        if w.len() == depth {
            continue;
        }
        for e in g.events() {
            if let Some(t) = obs.step(h, e) {
                queue.push_back((w.pushed(e), Some(h), t));
            }
        }
    }
    Ok(report(words, None))
}

fn candidate_family(ex: &mut Explorer, w: &Word, budget: usize) -> Result<BTreeSet<ObserverState>> {
    let mut family = ex.initials()?;
    for &e in w.iter() {
        let mut next = BTreeSet::new();
        for z in &family {
            next.extend(ex.xi(z, e)?);
            if next.len() > budget {
                return Err(Error::StateBudgetExceeded(budget));
            }
        }
        family = next;
    }
    Ok(family)
}

/// Every brute-force estimate satisfies `prop`.
pub fn check_problem1(
    sys: &LabeledSystem,
    policy: &Policy,
    prop: &dyn IsProperty,
    depth: usize,
) -> Result<CheckReport> {
    let g = sys.plant();
    let mut words = 0;
    for s in g.language_upto(depth) {
        words += 1;
        let est = estimate_exact(sys, policy, &s)?;
        if !prop.holds(&est) {
            return Ok(CheckReport {
                check: Check::Problem1,
                words,
                depth,
                failure: Some(Failure {
                    word: s,
                    expected: "property".into(),
                    got: g.render_states(&est),
                }),
            });
        }
    }
    Ok(CheckReport {
        check: Check::Problem1,
        words,
        depth,
        failure: None,
    })
}

/// Online session: feeds plant events one at a time.
pub struct Runtime<'a> {
    sys: &'a LabeledSystem,
    policy: &'a Policy,
    observer: ProductObserver,
    position: LabeledState,
    h: usize,
    projection: Word,
}

impl<'a> Runtime<'a> {
    pub fn new(sys: &'a LabeledSystem, policy: &'a Policy) -> Result<Self> {
        let observer = observer_of_product(sys, &build_product(sys, policy), policy);
        let h = observer.initial().ok_or_else(|| {
            Error::InvalidPolicy("policy labels match no initial labeled state".into())
        })?;
        Ok(Runtime {
            sys,
            policy,
            observer,
            position: policy.initial(),
            h,
            projection: Word::empty(),
        })
    }

    pub fn plant_state(&self) -> StateId {
        self.position.base
    }

    pub fn projection(&self) -> &Word {
        &self.projection
    }

    pub fn estimate(&self) -> BTreeSet<StateId> {
        i1(self.observer.state(self.h))
    }

    pub fn step(&mut self, e: EventId) -> Result<(bool, BTreeSet<StateId>)> {
        let (sent, next) = self.policy.advance(self.sys, self.position, e)?;
        if sent {
            self.h = self
                .observer
                .step(self.h, e)
                .expect("transmitted step of a live run has an observer successor");
            self.projection.push(e);
        }
        self.position = next;
        Ok((sent, self.estimate()))
    }
}

pub fn runtime_step(rt: &mut Runtime<'_>, e: EventId) -> Result<(bool, BTreeSet<StateId>)> {
    rt.step(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::property::{distinguishability, DistinguishabilitySpec};

    fn sys() -> LabeledSystem {
        LabeledSystem::new(fixtures::running_example()).unwrap()
    }

    fn ids(sys: &LabeledSystem, names: &[&str]) -> BTreeSet<StateId> {
        names
            .iter()
            .map(|n| sys.plant().state_id(n).unwrap())
            .collect()
    }

    #[test]
    fn brute_force_estimates() {
        let sys = sys();
        let g = sys.plant();
        let all_y = Policy::constant(&sys, TransmitLabel::Y);
        let all_n = Policy::constant(&sys, TransmitLabel::N);
        let reference = fixtures::reference_policy(&sys);
        let s2 = g.parse_word("σ2").unwrap();
        assert_eq!(
            estimate_bruteforce(&sys, &all_y, &s2, 6).unwrap(),
            ids(&sys, &["q1"])
        );
        assert_eq!(
            estimate_bruteforce(&sys, &all_n, &[], 6).unwrap(),
            ids(&sys, &["q0", "q1", "q2", "q3", "q4", "q5"])
        );
        assert_eq!(
            estimate_bruteforce(&sys, &reference, &[], 6).unwrap(),
            ids(&sys, &["q0", "q5", "q1"])
        );
    }

    #[test]
    fn product_shapes() {
        let sys = sys();
        let all_y = Policy::constant(&sys, TransmitLabel::Y);
        let p = build_product(&sys, &all_y);
        assert_eq!(p.states().len(), 6);
        assert_eq!(p.transition_count(), 7);
        assert!(p.states().iter().all(|v| v.sensor == v.aug));

        let reference = fixtures::reference_policy(&sys);
        let p = build_product(&sys, &reference);
        let x0 = sys.parse_state("q0NNY").unwrap();
        assert_eq!(
            p.initials(),
            &BTreeSet::from([ProductState {
                sensor: x0,
                aug: x0
            }])
        );
    }

    #[test]
    fn product_observers() {
        let sys = sys();
        let all_y = Policy::constant(&sys, TransmitLabel::Y);
        let obs = observer_of_product(&sys, &build_product(&sys, &all_y), &all_y);
        assert_eq!(obs.states().len(), 6);
        assert!(obs.states().iter().all(|h| h.len() == 1));

        let all_n = Policy::constant(&sys, TransmitLabel::N);
        let obs = observer_of_product(&sys, &build_product(&sys, &all_n), &all_n);
        assert_eq!(obs.states().len(), 1);
        assert_eq!(obs.transitions().count(), 0);

        let reference = fixtures::reference_policy(&sys);
        let obs = observer_of_product(&sys, &build_product(&sys, &reference), &reference);
        let h0 = obs.state(0);
        assert_eq!(i1(h0), ids(&sys, &["q0", "q5", "q1"]));
        let z0 = ObserverState::new(["q0NNY", "q5", "q1Y"].map(|n| sys.parse_state(n).unwrap()));
        assert_eq!(i2(h0), z0);
    }

    #[test]
    fn checks_on_reference_policy() {
        let sys = sys();
        let reference = fixtures::reference_policy(&sys);
        assert!(check_prop1(&sys, &reference, 5).unwrap().ok());
        assert!(check_thm1(&sys, &reference, 5).unwrap().ok());
        let all_y = Policy::constant(&sys, TransmitLabel::Y);
        assert!(check_prop1(&sys, &all_y, 5).unwrap().ok());
        assert!(check_thm1(&sys, &all_y, 5).unwrap().ok());
    }

    #[test]
    fn problem1_verdicts() {
        let sys = sys();
        let t = distinguishability(fixtures::separation_spec(sys.plant()));
        let all_n = Policy::constant(&sys, TransmitLabel::N);
        let r = check_problem1(&sys, &all_n, &t, 2).unwrap();
        assert_eq!(r.failure.as_ref().unwrap().word, Word::empty());
        assert!(r.line(&sys).starts_with("FAIL PROBLEM1 word=ε"));

        let none = distinguishability(DistinguishabilitySpec::default());
        assert!(check_problem1(&sys, &all_n, &none, 3).unwrap().ok());
    }

    #[test]
    fn runtime_walkthrough() {
        let sys = sys();
        let g = sys.plant();
        let e = |n| g.event_id(n).unwrap();
        let reference = fixtures::reference_policy(&sys);

        let mut rt = Runtime::new(&sys, &reference).unwrap();
        assert_eq!(
            runtime_step(&mut rt, e("σ3")).unwrap(),
            (true, ids(&sys, &["q3"]))
        );
        let mut rt = Runtime::new(&sys, &reference).unwrap();
        assert_eq!(
            rt.step(e("σ1")).unwrap(),
            (false, ids(&sys, &["q0", "q5", "q1"]))
        );
        assert!(matches!(
            rt.step(e("σ1")),
            Err(Error::UndefinedEvent { .. })
        ));

        let all_y = Policy::constant(&sys, TransmitLabel::Y);
        let mut rt = Runtime::new(&sys, &all_y).unwrap();
        for ev in ["σ2", "σ2", "σ1"] {
            let (sent, est) = rt.step(e(ev)).unwrap();
            assert!(sent);
            assert_eq!(est.len(), 1);
        }
    }
}
