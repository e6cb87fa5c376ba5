//! Shared inputs for the criterion benches.

use destx::{
    build_observer, consistency_fixpoint, distinguishability, fixtures, prune_dissatisfying,
    Distinguishability, DynamicObserver, LabeledSystem, PrunedObserver,
};

pub struct RunningExample {
    pub sys: LabeledSystem,
    pub spec: Distinguishability,
    pub full: DynamicObserver,
    pub gstar: PrunedObserver,
}

pub fn running_example() -> RunningExample {
    let sys = LabeledSystem::new(fixtures::running_example()).unwrap();
    let spec = distinguishability(fixtures::separation_spec(sys.plant()));
    let full = build_observer(&sys).unwrap();
    let gstar = consistency_fixpoint(&full, &prune_dissatisfying(&full, &spec)).unwrap();
    RunningExample {
        sys,
        spec,
        full,
        gstar,
    }
}
