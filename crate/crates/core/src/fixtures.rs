//! The reference machines used throughout the documentation and tests.

use std::collections::BTreeMap;

use crate::model::{
    GeneralMachine, Guard, GuardedMachine, GuardedTransition as T, IoTransition as Io, Signature, Timeout,
    TimeoutMachine,
};

/// Two-state guarded machine: `s0` loops with `o1` on `[0,1]` and moves to
/// `s1` with `o2` on `(1,∞)`; `s1` returns with `o1` on `[1,∞)` and loops
/// with `o2` on `[0,1)`.
pub fn fig1a() -> GuardedMachine {
    GuardedMachine::new(
        Signature::new(["s0", "s1"], ["i"], ["o1", "o2"], "s0"),
        vec![
            T::new("s0", "i", Guard::closed(0, 1), "o1", "s0"),
            T::new("s0", "i", Guard::above(1), "o2", "s1"),
            T::new("s1", "i", Guard::at_least(1), "o1", "s0"),
            T::new("s1", "i", Guard::closed_open(0, 1), "o2", "s1"),
        ],
    )
}

/// Two-state timeout machine: `q0` answers `o1` and times out to `q1`
/// after 3; `q1` answers `o2` and times out back to `q0` after 2.
pub fn fig2a() -> TimeoutMachine {
    TimeoutMachine::new(
        Signature::new(["q0", "q1"], ["i"], ["o1", "o2"], "q0"),
        vec![Io::new("q0", "i", "o1", "q0"), Io::new("q1", "i", "o2", "q1")],
        BTreeMap::from([("q0".to_string(), Timeout::after(3, "q1")), ("q1".to_string(), Timeout::after(2, "q0"))]),
    )
}

/// Machine with guards and timeouts: `s0` loops with `o1` on `[0,1)` and
/// times out to `s1` after 1; `s1` loops with `o2` on `[0,1]`, returns to
/// `s0` with `o1` on `(1,∞)` and never times out.
pub fn fig3a() -> GeneralMachine {
    GeneralMachine::new(
        Signature::new(["s0", "s1"], ["i"], ["o1", "o2"], "s0"),
        vec![
            T::new("s0", "i", Guard::closed_open(0, 1), "o1", "s0"),
            T::new("s1", "i", Guard::above(1), "o1", "s0"),
            T::new("s1", "i", Guard::closed(0, 1), "o2", "s1"),
        ],
        BTreeMap::from([("s0".to_string(), Timeout::after(1, "s1")), ("s1".to_string(), Timeout::never("s1"))]),
    )
}

/// Timeout machine toggling between `q0` (`o1`) and `q1` (`o2`) every
/// time unit. No guarded machine has this behavior.
pub fn m1() -> TimeoutMachine {
    TimeoutMachine::new(
        Signature::new(["q0", "q1"], ["i"], ["o1", "o2"], "q0"),
        vec![Io::new("q0", "i", "o1", "q0"), Io::new("q1", "i", "o2", "q1")],
        BTreeMap::from([("q0".to_string(), Timeout::after(1, "q1")), ("q1".to_string(), Timeout::after(1, "q0"))]),
    )
}

/// One-state guarded machine answering `o1` for clocks `≤ 2` and `o2`
/// above. No timeout machine has this behavior.
pub fn m2() -> GuardedMachine {
    GuardedMachine::new(
        Signature::new(["q0"], ["i"], ["o1", "o2"], "q0"),
        vec![T::new("q0", "i", Guard::closed(0, 2), "o1", "q0"), T::new("q0", "i", Guard::above(2), "o2", "q0")],
    )
}
