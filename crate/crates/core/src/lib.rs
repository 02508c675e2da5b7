//! Timed finite state machines with a single clock.
//!
//! Three machine variants are supported: machines whose input/output
//! transitions carry timed guards, machines with per-state timeouts, and
//! machines with both. The crate provides their timed semantics, the
//! untimed abstractions that reduce timed equivalence to ordinary Mealy
//! machine equivalence, counterexample lifting, bisimulation checks and the
//! conversions between the guarded and timeout subclasses.

pub mod abstraction;
pub mod bisim;
pub mod cli;
pub mod equivalence;
pub mod fixtures;
pub mod format;
pub mod model;
pub mod region;
pub mod sample;
pub mod semantics;
pub mod time;
pub mod transform;
pub mod validate;

pub use abstraction::{
    abstract_general, abstract_guarded, abstract_machine, abstract_timeout, abstract_word_one, abstract_word_regions,
    abstract_word_tick, AbstractState, AbstractSymbol, UntimedFsm,
};
pub use bisim::{canonical_relation, check_region_bisimulation, ClockClass, RegionRelation};
pub use equivalence::{
    fsm_equivalent, general_equivalent, guarded_equivalent, lift_one, lift_regions, lift_tick, timeout_equivalent,
    Counterexample, EquivalenceError, Verdict,
};
pub use model::{
    untime, Bound, GeneralMachine, Guard, GuardedMachine, GuardedTransition, IoTransition, Machine, MachineKind,
    Signature, TimedState, TimedWord, Timeout, TimeoutMachine,
};
pub use region::{classify, interval_set, Region};
pub use semantics::{run, step, Run, RunTrace, TimedSemantics};
pub use time::Rational;
pub use transform::{
    cross_equivalent, embed, embed_guarded, embed_timeout, is_lcro, is_timeout_loop_free, lcro_guarded_to_timeout,
    loopfree_timeout_to_guarded, TransformError,
};
pub use validate::{ValidationReport, Violation};
