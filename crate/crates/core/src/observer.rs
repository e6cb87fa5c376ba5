//! Reach-closed, non-conflicting state sets and the dynamic observer.
//!
//! A set `D` is non-conflicting for a seed when some finite decision tree
//! rooted at the seed produces exactly `D`: every tree node is a labeled
//! state, and for each event it suppresses the node has at most one child,
//! which is a version of the plant successor. So every suppressed string
//! leads to at most one labeled state. The tree may revisit a plant state
//! and make a different choice there, which is how sets such as
//! `{q1N,q2N,q1Y}` arise from the seed `q2N`.
//!
//! Trees are enumerated bottom-up: `cover(u)` is the family of node sets of
//! all finite trees rooted at `u`, obtained as a least fixpoint.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt::Write as _;

use crate::automata::{EventId, Nfa};
use crate::error::{Error, Result};
use crate::labeled::{LabeledState, LabeledSystem, TransmitLabel};

pub const DEFAULT_STATE_BUDGET: usize = 100_000;
/// Upper bound on the size of any intermediate tree family.
const FAMILY_LIMIT: usize = 1 << 21;
/// Universes up to this size keep families as dense indicator vectors.
const DENSE_LIMIT: usize = 16;

/// A canonically ordered, nonempty set of labeled states.
///
/// Ordered by cardinality first, then by member sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ObserverState(Vec<LabeledState>);

impl ObserverState {
    pub fn new(members: impl IntoIterator<Item = LabeledState>) -> Self {
        let mut v: Vec<LabeledState> = members.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        ObserverState(v)
    }

    pub fn members(&self) -> &[LabeledState] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, ls: LabeledState) -> bool {
        self.0.binary_search(&ls).is_ok()
    }

    pub fn render(&self, sys: &LabeledSystem) -> String {
        sys.render_set(&self.0)
    }
}

impl Ord for ObserverState {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for ObserverState {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub type DynamicObserver = Nfa<ObserverState>;

pub fn is_reach_closed(sys: &LabeledSystem, cand: &BTreeSet<LabeledState>) -> bool {
    cand.iter().all(|&u| {
        sys.events_labeled(u, TransmitLabel::N)
            .all(|e| sys.successors(u, e).any(|v| cand.contains(&v)))
    })
}

fn bits(mut m: u128) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if m == 0 {
            return None;
        }
        let i = m.trailing_zeros() as usize;
        m &= m - 1;
        Some(i)
    })
}

/// Labeled states indexed locally so sets become `u128` masks.
struct Universe {
    members: Vec<LabeledState>,
    /// Per member, one mask per suppressed event: the successor versions
    /// that lie inside the universe.
    steps: Vec<Vec<u128>>,
}

impl Universe {
    fn new(sys: &LabeledSystem, members: BTreeSet<LabeledState>) -> Result<Self> {
        if members.len() > 128 {
            return Err(Error::InstanceTooLarge(format!(
                "{} labeled states in one unobservable reach",
                members.len()
            )));
        }
        let members: Vec<LabeledState> = members.into_iter().collect();
        let local = |ls: LabeledState| members.binary_search(&ls).ok();
        let steps = members
            .iter()
            .map(|&u| {
                sys.events_labeled(u, TransmitLabel::N)
                    .map(|e| {
                        sys.successors(u, e)
                            .filter_map(local)
                            .fold(0u128, |m, i| m | 1 << i)
                    })
                    .collect()
            })
            .collect();
        Ok(Universe { members, steps })
    }

    fn local(&self, ls: LabeledState) -> Option<usize> {
        self.members.binary_search(&ls).ok()
    }

    fn mask_of<'a>(&self, set: impl IntoIterator<Item = &'a LabeledState>) -> Option<u128> {
        set.into_iter()
            .try_fold(0u128, |m, &ls| self.local(ls).map(|i| m | 1 << i))
    }

    fn closed(&self, mask: u128) -> bool {
        bits(mask).all(|u| self.steps[u].iter().all(|&m| m & mask != 0))
    }

    fn to_state(&self, mask: u128) -> ObserverState {
        ObserverState(bits(mask).map(|i| self.members[i]).collect())
    }

    /// Node sets of all finite decision trees rooted at each member.
    fn cover(&self) -> Result<Vec<HashSet<u128>>> {
        if self.members.len() <= DENSE_LIMIT {
            Ok(self.cover_dense())
        } else {
            self.cover_sparse()
        }
    }

    fn cover_sparse(&self) -> Result<Vec<HashSet<u128>>> {
        let n = self.members.len();
        let mut cov: Vec<HashSet<u128>> = vec![HashSet::new(); n];
        loop {
            let mut changed = false;
            for u in 0..n {
                let mut acc: HashSet<u128> = HashSet::from([1u128 << u]);
                for &succ in &self.steps[u] {
                    // Leaving the child out is allowed: trees are partial.
                    let mut next = acc.clone();
                    for &a in &acc {
                        for v in bits(succ) {
                            next.extend(cov[v].iter().map(|&c| a | c));
                        }
                    }
                    if next.len() > FAMILY_LIMIT {
                        return Err(Error::InstanceTooLarge(
                            "decision-tree family too large".into(),
                        ));
                    }
                    acc = next;
                }
                if acc.len() != cov[u].len() {
                    cov[u] = acc;
                    changed = true;
                }
            }
            if !changed {
                return Ok(cov);
            }
        }
    }
}

impl Universe {
    /// Same fixpoint as `cover`, with each family stored as an indicator
    /// over all subsets of the universe.
    fn cover_dense(&self) -> Vec<HashSet<u128>> {
        let n = self.members.len();
        let size = 1usize << n;
        let mut cov: Vec<Vec<bool>> = vec![vec![false; size]; n];
        loop {
            let mut changed = false;
            for u in 0..n {
                let mut acc = vec![false; size];
                acc[0] = true;
                for &succ in &self.steps[u] {
                    let mut opt = vec![false; size];
                    opt[0] = true;
                    for v in bits(succ) {
                        for (o, &c) in opt.iter_mut().zip(&cov[v]) {
                            *o |= c;
                        }
                    }
                    acc = or_product(&acc, &opt, n);
                }
                let mut fam = vec![false; size];
                for (m, _) in acc.iter().enumerate().filter(|(_, &b)| b) {
                    fam[m | 1 << u] = true;
                }
                if fam != cov[u] {
                    cov[u] = fam;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        cov.into_iter()
            .map(|fam| {
                fam.iter()
                    .enumerate()
                    .filter(|(_, &b)| b)
                    .map(|(m, _)| m as u128)
                    .collect()
            })
            .collect()
    }
}

/// `{a | b : a in f, b in g}` on indicator vectors, through subset-sum
/// transforms. Counts stay below 2^48 for n <= 16.
fn or_product(f: &[bool], g: &[bool], n: usize) -> Vec<bool> {
    let zeta = |x: &[bool]| {
        let mut a: Vec<i64> = x.iter().map(|&b| b as i64).collect();
        for i in 0..n {
            for m in 0..a.len() {
                if m >> i & 1 == 1 {
                    a[m] += a[m ^ 1 << i];
                }
            }
        }
        a
    };
    let mut h: Vec<i64> = zeta(f).iter().zip(zeta(g)).map(|(x, y)| x * y).collect();
    for i in 0..n {
        for m in 0..h.len() {
            if m >> i & 1 == 1 {
                h[m] -= h[m ^ 1 << i];
            }
        }
    }
    h.into_iter().map(|c| c > 0).collect()
}

/// Whether a decision tree rooted at `seed` produces exactly `cand`.
pub fn is_non_conflicting(
    sys: &LabeledSystem,
    seed: LabeledState,
    cand: &BTreeSet<LabeledState>,
) -> bool {
    if !cand.contains(&seed) {
        return false;
    }
    let Ok(uni) = Universe::new(sys, cand.clone()) else {
        return false;
    };
    let Ok(cov) = uni.cover() else {
        return false;
    };
    let full = uni.mask_of(cand).unwrap();
    cov[uni.local(seed).unwrap()].contains(&full)
}

/// Every reach-closed, non-conflicting subset of the unobservable reach of `seed`.
pub fn max_s(sys: &LabeledSystem, seed: LabeledState) -> Result<BTreeSet<ObserverState>> {
    max_s_core(sys, &BTreeSet::from([seed]))
}

/// Generalization to a multi-element core: each returned set contains the
/// whole core and is the union of one decision tree per core member.
pub fn max_s_core(
    sys: &LabeledSystem,
    core: &BTreeSet<LabeledState>,
) -> Result<BTreeSet<ObserverState>> {
    let reach: BTreeSet<LabeledState> = core
        .iter()
        .flat_map(|&c| sys.unobservable_reach(c))
        .collect();
    let uni = Universe::new(sys, reach)?;
    let cov = uni.cover()?;
    let mut acc: HashSet<u128> = HashSet::from([0]);
    for &c in core {
        let trees = &cov[uni.local(c).unwrap()];
        let mut next = HashSet::with_capacity(acc.len() * trees.len());
        for &a in &acc {
            next.extend(trees.iter().map(|&t| a | t));
        }
        if next.len() > FAMILY_LIMIT {
            return Err(Error::InstanceTooLarge(
                "core forest family too large".into(),
            ));
        }
        acc = next;
    }
    Ok(acc
        .into_iter()
        .filter(|&m| uni.closed(m))
        .map(|m| uni.to_state(m))
        .collect())
}

/// Decision-tree families over a single target set, for membership tests.
struct TargetCover {
    uni: Universe,
    cov: Vec<HashSet<u128>>,
    full: u128,
}

impl TargetCover {
    /// `None` when the target is not reach-closed, so nothing can produce it.
    fn new(sys: &LabeledSystem, target: &ObserverState) -> Result<Option<Self>> {
        // Trees that stay inside the target are exactly the trees over the
        // target's own universe.
        let uni = Universe::new(sys, target.members().iter().copied().collect())?;
        let full = uni.mask_of(target.members()).unwrap();
        if !uni.closed(full) {
            return Ok(None);
        }
        let cov = uni.cover()?;
        Ok(Some(TargetCover { uni, cov, full }))
    }

    fn produced_by(&self, core: &BTreeSet<LabeledState>) -> Result<bool> {
        let Some(roots) = core
            .iter()
            .map(|&c| self.uni.local(c))
            .collect::<Option<Vec<_>>>()
        else {
            return Ok(false);
        };
        let mut acc: HashSet<u128> = HashSet::from([0]);
        for r in roots {
            let mut next = HashSet::new();
            for &a in &acc {
                next.extend(self.cov[r].iter().map(|&t| a | t));
            }
            if next.len() > FAMILY_LIMIT {
                return Err(Error::InstanceTooLarge(
                    "core forest family too large".into(),
                ));
            }
            acc = next;
        }
        Ok(acc.contains(&self.full))
    }
}

/// Whether `target` belongs to `max_s_core(sys, core)`, decided without
/// enumerating the whole family.
pub fn in_max_s_core(
    sys: &LabeledSystem,
    core: &BTreeSet<LabeledState>,
    target: &ObserverState,
) -> Result<bool> {
    if core.is_empty() {
        return Ok(false);
    }
    match TargetCover::new(sys, target)? {
        Some(tc) => tc.produced_by(core),
        None => Ok(false),
    }
}

/// Whether `target` is among `xi(sys, z, e)`. Only cores inside the
/// target can produce it, so the others are never built.
pub fn xi_contains(
    sys: &LabeledSystem,
    z: &ObserverState,
    e: EventId,
    target: &ObserverState,
) -> Result<bool> {
    let mut cores = BTreeSet::from([BTreeSet::new()]);
    for &u in z.members() {
        if sys.label_at(u, e) != Some(TransmitLabel::Y) {
            continue;
        }
        let opts: Vec<LabeledState> = sys
            .successors(u, e)
            .filter(|&v| target.contains(v))
            .collect();
        cores = cores
            .iter()
            .flat_map(|c: &BTreeSet<LabeledState>| {
                opts.iter().map(move |&v| {
                    let mut c = c.clone();
                    c.insert(v);
                    c
                })
            })
            .collect();
    }
    cores.retain(|c| !c.is_empty());
    if cores.is_empty() {
        return Ok(false);
    }
    let Some(tc) = TargetCover::new(sys, target)? else {
        return Ok(false);
    };
    for core in &cores {
        if tc.produced_by(core)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Candidate cores after observing `e`: every way of picking one version of
/// the successor for each member that transmits `e`.
pub fn nx(sys: &LabeledSystem, z: &ObserverState, e: EventId) -> BTreeSet<BTreeSet<LabeledState>> {
    let choices: Vec<Vec<LabeledState>> = z
        .members()
        .iter()
        .filter(|&&u| sys.label_at(u, e) == Some(TransmitLabel::Y))
        .map(|&u| sys.successors(u, e).collect())
        .collect();
    if choices.is_empty() {
        return BTreeSet::new();
    }
    let mut cores = BTreeSet::from([BTreeSet::new()]);
    for options in &choices {
        cores = cores
            .iter()
            .flat_map(|core| {
                options.iter().map(move |&v| {
                    let mut c = core.clone();
                    c.insert(v);
                    c
                })
            })
            .collect();
    }
    cores
}

/// Memoizing evaluator for observer successors.
pub struct Explorer<'a> {
    sys: &'a LabeledSystem,
    cache: HashMap<BTreeSet<LabeledState>, BTreeSet<ObserverState>>,
}

impl<'a> Explorer<'a> {
    pub fn new(sys: &'a LabeledSystem) -> Self {
        Explorer {
            sys,
            cache: HashMap::new(),
        }
    }

    pub fn max_s_core(
        &mut self,
        core: &BTreeSet<LabeledState>,
    ) -> Result<&BTreeSet<ObserverState>> {
        if !self.cache.contains_key(core) {
            let fam = max_s_core(self.sys, core)?;
            self.cache.insert(core.clone(), fam);
        }
        Ok(&self.cache[core])
    }

    pub fn initials(&mut self) -> Result<BTreeSet<ObserverState>> {
        let mut out = BTreeSet::new();
        for q0 in self.sys.initials() {
            out.extend(self.max_s_core(&BTreeSet::from([q0]))?.iter().cloned());
        }
        Ok(out)
    }

    pub fn xi(&mut self, z: &ObserverState, e: EventId) -> Result<BTreeSet<ObserverState>> {
        let mut out = BTreeSet::new();
        for core in nx(self.sys, z, e) {
            out.extend(self.max_s_core(&core)?.iter().cloned());
        }
        Ok(out)
    }
}

pub fn xi(sys: &LabeledSystem, z: &ObserverState, e: EventId) -> Result<BTreeSet<ObserverState>> {
    Explorer::new(sys).xi(z, e)
}

pub fn build_observer(sys: &LabeledSystem) -> Result<DynamicObserver> {
    build_observer_with_budget(sys, DEFAULT_STATE_BUDGET)
}

pub fn build_observer_with_budget(sys: &LabeledSystem, budget: usize) -> Result<DynamicObserver> {
    let mut ex = Explorer::new(sys);
    let mut obs = Nfa::new(sys.plant().events());
    let mut seen: HashSet<ObserverState> = HashSet::new();
    let mut queue = VecDeque::new();
    for z in ex.initials()? {
        obs.add_initial(z.clone());
        seen.insert(z.clone());
        queue.push_back(z);
    }
    if seen.len() > budget {
        return Err(Error::StateBudgetExceeded(budget));
    }
    while let Some(z) = queue.pop_front() {
        for e in sys.plant().events() {
            for t in ex.xi(&z, e)? {
                if seen.insert(t.clone()) {
                    if seen.len() > budget {
                        return Err(Error::StateBudgetExceeded(budget));
                    }
                    queue.push_back(t.clone());
                }
                obs.add_transition(z.clone(), e, t);
            }
        }
    }
    Ok(obs)
}

/// Graphviz rendering; initial states are double-circled.
pub fn observer_dot(sys: &LabeledSystem, obs: &DynamicObserver) -> String {
    let ids: HashMap<&ObserverState, usize> = obs
        .states()
        .iter()
        .enumerate()
        .map(|(i, z)| (z, i))
        .collect();
    let mut out = String::from("digraph observer {\n  rankdir=LR;\n  node [shape=ellipse];\n");
    for (i, z) in obs.states().iter().enumerate() {
        let extra = if obs.initials().contains(z) {
            ", peripheries=2"
        } else {
            ""
        };
        let _ = writeln!(out, "  z{i} [label=\"{}\"{extra}];", z.render(sys));
    }
    for (from, e, to) in obs.transitions() {
        let _ = writeln!(
            out,
            "  z{} -> z{} [label=\"{}\"];",
            ids[from],
            ids[to],
            sys.plant().event_name(e)
        );
    }
    out.push_str("}\n");
    out
}
