use std::collections::{BTreeMap, BTreeSet};

use destx::sample::random_policy;
use destx::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const EVENTS: [&str; 3] = ["a", "b", "c"];

fn build(n: usize, m: usize, table: &[Option<usize>]) -> Plant {
    let states: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
    let mut trans = Vec::new();
    for (k, t) in table.iter().enumerate() {
        if let Some(t) = t {
            trans.push((
                states[k / m].clone(),
                EVENTS[k % m].to_owned(),
                states[*t].clone(),
            ));
        }
    }
    let events: Vec<String> = EVENTS[..m].iter().map(|e| e.to_string()).collect();
    Plant::new(&states, &events, "s0", &trans).unwrap()
}

fn plant(max_states: usize, max_events: usize) -> impl Strategy<Value = Plant> {
    (1..=max_states, 1..=max_events).prop_flat_map(|(n, m)| {
        proptest::collection::vec(proptest::option::weighted(0.5, 0..n), n * m)
            .prop_map(move |table| build(n, m, &table))
    })
}

fn word(g: &Plant, raw: &[usize]) -> Word {
    let mut w = Word::empty();
    for &i in raw {
        w.push(EventId(i as u32 % g.num_events() as u32));
    }
    w
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn delta_ext_composes(g in plant(4, 3), u in prop::collection::vec(0usize..3, 0..5), v in prop::collection::vec(0usize..3, 0..5)) {
        let (u, v) = (word(&g, &u), word(&g, &v));
        let mut uv = u.clone();
        for &e in v.iter() {
            uv.push(e);
        }
        for q in g.states() {
            let split = g.delta_ext(q, &u).and_then(|p| g.delta_ext(p, &v));
            prop_assert_eq!(g.delta_ext(q, &uv), split);
        }
    }

    #[test]
    fn language_grows_and_is_prefix_closed(g in plant(4, 3), k in 0usize..5) {
        let small = g.language_upto(k);
        let big = g.language_upto(k + 1);
        prop_assert!(small.is_subset(&big));
        for w in &big {
            prop_assert!(g.generates(w));
            prop_assert!(w.len() <= k + 1);
            if !w.is_empty() {
                prop_assert!(big.contains(&Word::from(w[..w.len() - 1].to_vec())));
            }
        }
    }

    #[test]
    fn projection_is_idempotent(raw in prop::collection::vec(0u32..3, 0..8), mask in 0u8..8) {
        let s: Vec<EventId> = raw.into_iter().map(EventId).collect();
        let obs: BTreeSet<EventId> = (0..3).filter(|i| mask >> i & 1 == 1).map(EventId).collect();
        let once = project(&s, &obs);
        prop_assert_eq!(project(&once, &obs), once.clone());
        prop_assert!(once.iter().all(|e| obs.contains(e)));
    }

    #[test]
    fn restrict_composes(g in plant(4, 3), a in 0u8..16, b in 0u8..16) {
        let nfa = g.to_nfa();
        let pick = |m: u8| -> BTreeSet<StateId> { g.states().filter(|q| m >> q.index() & 1 == 1).collect() };
        let (a, b) = (pick(a), pick(b));
        let both: BTreeSet<StateId> = a.intersection(&b).copied().collect();
        prop_assert_eq!(nfa.restrict(&a).restrict(&b), nfa.restrict(&both));
    }

    #[test]
    fn one_version_per_label_vector(g in plant(4, 3)) {
        let sys = LabeledSystem::new(g.clone()).unwrap();
        let expected: usize = g.states().map(|q| 1usize << g.defined_events(q).len()).sum();
        prop_assert_eq!(sys.len(), expected);
        prop_assert_eq!(sys.iter().count(), expected);
        for ls in sys.iter() {
            prop_assert_eq!(sys.parse_state(&sys.render(ls)).unwrap(), ls);
        }
    }

    #[test]
    fn unobservable_reach_matches_suppressed_strings(g in plant(4, 3)) {
        let sys = LabeledSystem::new(g.clone()).unwrap();
        let bound = sys.len();
        for seed in sys.iter() {
            // Follow every string, branching over the version entered at
            // each step, and only through events suppressed where taken.
            let mut found = BTreeSet::from([seed]);
            let mut frontier = vec![seed];
            for _ in 0..bound {
                let mut next = Vec::new();
                for &x in &frontier {
                    for e in g.events() {
                        if sys.label_at(x, e) != Some(TransmitLabel::N) {
                            continue;
                        }
                        let q = g.step(x.base, e).unwrap();
                        for v in sys.versions(q) {
                            if found.insert(v) {
                                next.push(v);
                            }
                        }
                    }
                }
                frontier = next;
            }
            prop_assert_eq!(sys.unobservable_reach(seed), found);
        }
    }

    #[test]
    fn runtime_matches_bruteforce_at_every_prefix(g in plant(4, 3), seed in any::<u64>(), raw in prop::collection::vec(0usize..3, 0..6)) {
        let sys = LabeledSystem::new(g.clone()).unwrap();
        let p = random_policy(&mut ChaCha8Rng::seed_from_u64(seed), &sys);
        let mut rt = Runtime::new(&sys, &p).unwrap();
        let mut prefix = Word::empty();
        prop_assert_eq!(rt.estimate(), destx::estimation::estimate_exact(&sys, &p, &prefix).unwrap());
        for e in word(&g, &raw).iter().copied() {
            if g.step(rt.plant_state(), e).is_none() {
                break;
            }
            prefix.push(e);
            let (_, est) = rt.step(e).unwrap();
            prop_assert_eq!(est, destx::estimation::estimate_exact(&sys, &p, &prefix).unwrap());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn max_s_matches_oracle(g in plant(3, 2)) {
        let sys = LabeledSystem::new(g).unwrap();
        for seed in sys.iter() {
            let reach = sys.unobservable_reach(seed).len();
            prop_assume!(reach <= 10);
            prop_assert_eq!(
                max_s(&sys, seed).unwrap(),
                brute_force_max_s(&sys, seed, 2 * reach + 2).unwrap()
            );
        }
    }

    #[test]
    fn observer_states_are_closed_and_produced(g in plant(3, 2)) {
        let sys = LabeledSystem::new(g).unwrap();
        let Ok(obs) = build_observer_with_budget(&sys, 2_000) else {
            return Ok(());
        };
        for z in obs.states() {
            let members: BTreeSet<LabeledState> = z.members().iter().copied().collect();
            prop_assert!(is_reach_closed(&sys, &members));
        }
        for (z, e, t) in obs.transitions() {
            prop_assert!(xi_contains(&sys, z, e, t).unwrap());
        }
    }
}

/// Policy that transmits exactly the events in `sent`, whatever the history.
fn static_policy(sys: &LabeledSystem, sent: &BTreeSet<EventId>) -> Policy {
    let g = sys.plant();
    let version = |q| {
        sys.version(q, |e| {
            if sent.contains(&e) {
                TransmitLabel::Y
            } else {
                TransmitLabel::N
            }
        })
    };
    let mut eta = BTreeMap::new();
    let mut stack = vec![g.initial()];
    let mut seen = BTreeSet::new();
    while let Some(q) = stack.pop() {
        if !seen.insert(q) {
            continue;
        }
        for &e in g.defined_events(q) {
            let t = g.step(q, e).unwrap();
            eta.insert((version(q), e), version(t));
            stack.push(t);
        }
    }
    Policy::new(sys, version(g.initial()), eta).unwrap()
}

/// Classical estimate under a fixed observable set, by enumerating plant
/// words. Unobservable stretches longer than |Q| - 1 add no new endpoints.
fn natural_estimate(g: &Plant, sent: &BTreeSet<EventId>, s: &[EventId]) -> BTreeSet<StateId> {
    let w = project(s, sent);
    let bound = w.len() + (w.len() + 1) * (g.num_states() - 1);
    g.language_upto(bound)
        .into_iter()
        .filter(|t| project(t, sent) == w)
        .filter_map(|t| g.delta_ext(g.initial(), &t))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn static_policies_give_natural_estimates(g in plant(3, 2), mask in 0u8..4, raw in prop::collection::vec(0usize..2, 0..4)) {
        let sys = LabeledSystem::new(g.clone()).unwrap();
        let sent: BTreeSet<EventId> = g.events().filter(|e| mask >> e.index() & 1 == 1).collect();
        let p = static_policy(&sys, &sent);
        let s = word(&g, &raw);
        prop_assume!(g.generates(&s));
        prop_assert_eq!(
            destx::estimation::estimate_exact(&sys, &p, &s).unwrap(),
            natural_estimate(&g, &sent, &s)
        );
    }

    #[test]
    fn fewer_static_observations_never_sharpen(g in plant(4, 3), a in 0u8..8, b in 0u8..8, raw in prop::collection::vec(0usize..3, 0..5)) {
        let sys = LabeledSystem::new(g.clone()).unwrap();
        let pick = |m: u8| -> BTreeSet<EventId> { g.events().filter(|e| m >> e.index() & 1 == 1).collect() };
        let more = pick(a | b);
        let fewer = pick(a);
        let s = word(&g, &raw);
        prop_assume!(g.generates(&s));
        let sharp = destx::estimation::estimate_exact(&sys, &static_policy(&sys, &more), &s).unwrap();
        let blunt = destx::estimation::estimate_exact(&sys, &static_policy(&sys, &fewer), &s).unwrap();
        prop_assert!(sharp.is_subset(&blunt));
    }
}

/// With history-dependent labels, suppressing one more event can shrink an
/// estimate: hiding `c` after `b` removes `bc` from the words that look
/// like `ac`.
#[test]
fn extra_suppression_can_sharpen_estimates() {
    let g = format::parse_des(
        "alphabet a b c\nstates p0 p1 p2 p3 p4\ninitial p0\n\
         trans p0 a p1\ntrans p0 b p2\ntrans p1 c p3\ntrans p2 c p4\n",
    )
    .unwrap();
    let sys = LabeledSystem::new(g).unwrap();
    let policy = |after_b| {
        let text = format!(
            "initial p0NN\ntrans p0NN a p1Y\ntrans p0NN b p2{after_b}\n\
             trans p1Y c p3\ntrans p2{after_b} c p4\n"
        );
        format::parse_policy(&text, &sys).unwrap()
    };
    let s = sys.plant().parse_word("a c").unwrap();
    let est = |p: &Policy| destx::estimation::estimate_exact(&sys, p, &s).unwrap();
    let names = |set: BTreeSet<StateId>| sys.plant().render_states(&set);
    assert_eq!(names(est(&policy("Y"))), "{p3,p4}");
    assert_eq!(names(est(&policy("N"))), "{p3}");
}
