//! Synthesis and verification of information-transmission policies for
//! discrete-event plants.
//!
//! A sensor sees every event of a deterministic plant and decides, per
//! history, whether to forward it to a remote receiver. The receiver keeps
//! a state estimate from what it receives. This crate builds the observer
//! of every feasible forwarding decision, prunes it against a property of
//! the estimate, extracts a concrete policy that forwards little, and
//! checks policies against brute-force estimation.

pub mod automata;
pub mod error;
pub mod estimation;
pub mod fixtures;
pub mod format;
pub mod labeled;
pub mod observer;
pub mod oracle;
pub mod property;
pub mod realization;
pub mod sample;
pub mod synthesis;

pub use automata::{project, EventId, Nfa, Plant, StateId, Word};
pub use error::{Error, Result};
pub use estimation::{
    build_product, check_problem1, check_prop1, check_thm1, estimate_bruteforce, i1, i2,
    observer_of_product, runtime_step, Check, CheckReport, EstimateReport, ProductObserver,
    ProductState, Runtime,
};
pub use labeled::{LabeledState, LabeledSystem, TransmitLabel};
pub use observer::{
    build_observer, build_observer_with_budget, in_max_s_core, is_non_conflicting, is_reach_closed,
    max_s, max_s_core, nx, xi, xi_contains, DynamicObserver, ObserverState, DEFAULT_STATE_BUDGET,
};
pub use oracle::brute_force_max_s;
pub use property::{
    distinguishability, underlying_states, z_dis, Distinguishability, DistinguishabilitySpec,
    IsProperty,
};
pub use realization::{policy_projection, rank, realize_policy, transmitted_count, Policy};
pub use synthesis::{
    consistency_fixpoint, consistency_step, count_nontransmitted, extract_min_transmit,
    is_consistent, prune_dissatisfying, split_sub_automata, DeterministicSchedule, InitialPin,
    NzMode, PrunedObserver, SubAutomaton,
};
