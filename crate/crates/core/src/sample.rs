//! Seeded random plants and policies for property suites and benchmarks.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;

use crate::automata::Plant;
use crate::labeled::{LabeledState, LabeledSystem};
use crate::realization::Policy;

#[derive(Debug, Clone, Copy)]
pub struct PlantShape {
    pub max_states: usize,
    pub max_events: usize,
    /// Chance that a given (state, event) pair has a transition.
    pub density: f64,
}

impl Default for PlantShape {
    fn default() -> Self {
        PlantShape {
            max_states: 4,
            max_events: 3,
            density: 0.4,
        }
    }
}

const EVENT_NAMES: [&str; 8] = ["a", "b", "c", "d", "e", "f", "g", "h"];

pub fn random_plant<R: Rng>(rng: &mut R, shape: PlantShape) -> Plant {
    let n = rng.gen_range(1..=shape.max_states.max(1));
    let m = rng.gen_range(1..=shape.max_events.clamp(1, EVENT_NAMES.len()));
    let states: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
    let events: Vec<String> = EVENT_NAMES[..m].iter().map(|s| s.to_string()).collect();
    let mut trans = Vec::new();
    for q in &states {
        for e in &events {
            if rng.gen_bool(shape.density) {
                let t = states[rng.gen_range(0..n)].clone();
                trans.push((q.clone(), e.clone(), t));
            }
        }
    }
    Plant::new(&states, &events, "s0", &trans).expect("generated plant is well formed")
}

/// A lockstep policy: every reachable labeled state picks one random
/// version of each plant successor.
pub fn random_policy<R: Rng>(rng: &mut R, sys: &LabeledSystem) -> Policy {
    let g = sys.plant();
    let pick = |rng: &mut R, q| {
        let n = sys.num_versions(q) as u32;
        LabeledState {
            base: q,
            labels: rng.gen_range(0..n),
        }
    };
    let x0 = pick(rng, g.initial());
    let mut eta = BTreeMap::new();
    let mut seen = BTreeSet::new();
    let mut stack = vec![x0];
    while let Some(x) = stack.pop() {
        if !seen.insert(x) {
            continue;
        }
        for &e in g.defined_events(x.base) {
            let t = pick(rng, g.step(x.base, e).unwrap());
            eta.insert((x, e), t);
            stack.push(t);
        }
    }
    Policy::new(sys, x0, eta).expect("generated policy follows the plant")
}
