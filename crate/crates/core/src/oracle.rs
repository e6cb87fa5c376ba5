//! Exhaustive reference for `max_s`, used only for differential testing.
//!
//! Enumerates every subset of the unobservable reach that contains the
//! seed, keeps the reach-closed ones, and then searches forward for a
//! family of suppressed paths from the seed, at most `depth` long, that
//! covers the subset exactly while never sending one suppressed string to
//! two different labeled states. Path families are grown level by level
//! as partial decision trees.

use std::collections::{BTreeSet, HashSet};

use crate::error::{Error, Result};
use crate::labeled::{LabeledState, LabeledSystem, TransmitLabel};
use crate::observer::{is_reach_closed, ObserverState};

const MAX_REACH: usize = 22;

pub fn brute_force_max_s(
    sys: &LabeledSystem,
    seed: LabeledState,
    depth: usize,
) -> Result<BTreeSet<ObserverState>> {
    let reach: Vec<LabeledState> = sys.unobservable_reach(seed).into_iter().collect();
    if reach.len() > MAX_REACH {
        return Err(Error::InstanceTooLarge(format!(
            "{} labeled states in reach, oracle handles {MAX_REACH}",
            reach.len()
        )));
    }
    let seed_pos = reach.iter().position(|&x| x == seed).unwrap();
    let others: Vec<usize> = (0..reach.len()).filter(|&i| i != seed_pos).collect();

    let mut out = BTreeSet::new();
    for pick in 0u64..(1 << others.len()) {
        let members: Vec<LabeledState> = std::iter::once(seed_pos)
            .chain(
                others
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| pick >> k & 1 == 1)
                    .map(|(_, &i)| i),
            )
            .map(|i| reach[i])
            .collect();
        let cand: BTreeSet<LabeledState> = members.iter().copied().collect();
        if !is_reach_closed(sys, &cand) {
            continue;
        }
        if path_family_exists(sys, seed, &cand, depth) {
            out.insert(ObserverState::new(cand));
        }
    }
    Ok(out)
}

/// Pending tree node: (level, index into the candidate list).
type Pending = (usize, usize);

fn path_family_exists(
    sys: &LabeledSystem,
    seed: LabeledState,
    cand: &BTreeSet<LabeledState>,
    depth: usize,
) -> bool {
    let list: Vec<LabeledState> = cand.iter().copied().collect();
    let pos = |ls: &LabeledState| list.binary_search(ls).ok();
    let full: u64 = (1u64 << list.len()) - 1;
    // For each member and each suppressed event: in-candidate successors.
    let options: Vec<Vec<Vec<usize>>> = list
        .iter()
        .map(|&u| {
            sys.events_labeled(u, TransmitLabel::N)
                .map(|e| sys.successors(u, e).filter_map(|v| pos(&v)).collect())
                .collect()
        })
        .collect();

    let dist = distances(&options);

    let start = (1u64 << pos(&seed).unwrap(), vec![(0, pos(&seed).unwrap())]);
    let mut seen: HashSet<(u64, Vec<Pending>)> = HashSet::new();
    let mut stack = vec![start];
    while let Some((covered, pending)) = stack.pop() {
        if covered == full {
            return true;
        }
        if pending.is_empty() || !seen.insert((covered, pending.clone())) {
            continue;
        }
        let (level, node) = pending[0];
        let rest = &pending[1..];
        if level == depth {
            stack.push((covered, rest.to_vec()));
            continue;
        }
        // One child or none per suppressed event.
        let mut combos: Vec<Vec<usize>> = vec![Vec::new()];
        for opts in &options[node] {
            let mut next = Vec::new();
            for c in &combos {
                next.push(c.clone());
                for &v in opts {
                    let mut c = c.clone();
                    c.push(v);
                    next.push(c);
                }
            }
            combos = next;
        }
        for children in combos {
            let mut cov = covered;
            let mut pend = rest.to_vec();
            for &v in &children {
                cov |= 1 << v;
                pend.push((level + 1, v));
            }
            let uncovered = full & !cov;
            // A pending node that cannot reach anything uncovered in the
            // depth it has left contributes nothing.
            let useful = |&(l, p): &Pending| {
                (0..list.len()).any(|u| uncovered >> u & 1 == 1 && dist[p][u] <= depth - l)
            };
            pend.retain(useful);
            let reachable = pend.iter().fold(0u64, |m, &(l, p)| {
                (0..list.len())
                    .filter(|&u| dist[p][u] <= depth - l)
                    .fold(m, |m, u| m | 1 << u)
            });
            if uncovered & !reachable != 0 {
                continue;
            }
            pend.sort_unstable();
            stack.push((cov, cap_duplicates(pend, uncovered.count_ones() as usize)));
        }
    }
    false
}

/// Shortest suppressed-step distances inside the candidate.
fn distances(options: &[Vec<Vec<usize>>]) -> Vec<Vec<usize>> {
    let n = options.len();
    let mut dist = vec![vec![usize::MAX; n]; n];
    for (src, row) in dist.iter_mut().enumerate() {
        row[src] = 0;
        let mut queue = std::collections::VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            for &v in options[u].iter().flatten() {
                if row[v] == usize::MAX {
                    row[v] = row[u] + 1;
                    queue.push_back(v);
                }
            }
        }
    }
    dist
}

/// Identical pending nodes are interchangeable; a completion never needs
/// more copies than there are uncovered members.
fn cap_duplicates(pend: Vec<Pending>, cap: usize) -> Vec<Pending> {
    let mut out: Vec<Pending> = Vec::with_capacity(pend.len());
    let mut run = 0;
    for p in pend {
        if out.last() == Some(&p) {
            run += 1;
        } else {
            run = 1;
        }
        if run <= cap {
            out.push(p);
        }
    }
    out
}
