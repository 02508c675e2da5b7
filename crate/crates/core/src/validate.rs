//! Structural validation: well-formedness, completeness and determinism.
//!
//! Violations are returned as data. Coverage of the clock domain is checked
//! region by region: with integer guard endpoints each region of `ℐ_K`
//! (`K` the largest constant in play) lies either inside or outside every
//! guard, so counting the guards that contain a region finds every gap and
//! every overlap, and the region representative is a concrete witness.

use std::collections::HashSet;
use std::fmt;

use crate::model::{
    Bound, GeneralMachine, Guard, GuardedMachine, GuardedTransition, Machine, Signature, TimeoutMachine, TimeoutMap,
};
use crate::region::{interval_set, Region};
use crate::time::{format_time, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    EmptyComponent {
        component: &'static str,
    },
    NameClash {
        name: String,
    },
    DuplicateName {
        name: String,
    },
    UnknownInitial {
        state: String,
    },
    UnknownState {
        state: String,
    },
    UnknownInput {
        input: String,
    },
    UnknownOutput {
        output: String,
    },
    /// No transition is enabled for `(state, input)` at clock `witness`.
    Gap {
        state: String,
        input: String,
        witness: Rational,
    },
    /// Two transitions are enabled for `(state, input)` at clock `witness`.
    Overlap {
        state: String,
        input: String,
        witness: Rational,
    },
    MissingTransition {
        state: String,
        input: String,
    },
    DuplicateTransition {
        state: String,
        input: String,
    },
    MissingTimeout {
        state: String,
    },
    NonPositiveTimeout {
        state: String,
    },
    GuardExceedsTimeout {
        state: String,
        input: String,
        guard: Guard,
        timeout: u64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            EmptyComponent { component } => write!(f, "{component} must be non-empty"),
            NameClash { name } => write!(f, "`{name}` is used in more than one of states, inputs, outputs"),
            DuplicateName { name } => write!(f, "`{name}` is declared twice"),
            UnknownInitial { state } => write!(f, "initial state `{state}` is not declared"),
            UnknownState { state } => write!(f, "unknown state `{state}`"),
            UnknownInput { input } => write!(f, "unknown input `{input}`"),
            UnknownOutput { output } => write!(f, "unknown output `{output}`"),
            Gap { state, input, witness } => {
                write!(f, "incomplete: no transition for ({state}, {input}) at clock {}", format_time(witness))
            }
            Overlap { state, input, witness } => write!(
                f,
                "non-deterministic: overlapping guards for ({state}, {input}) at clock {}",
                format_time(witness)
            ),
            MissingTransition { state, input } => write!(f, "incomplete: no transition for ({state}, {input})"),
            DuplicateTransition { state, input } => {
                write!(f, "non-deterministic: several transitions for ({state}, {input})")
            }
            MissingTimeout { state } => write!(f, "state `{state}` has no timeout entry"),
            NonPositiveTimeout { state } => write!(f, "non-positive timeout at state `{state}`"),
            GuardExceedsTimeout { state, input, guard, timeout } => {
                write!(f, "guard {guard} on ({state}, {input}) reaches the timeout {timeout}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return f.write_str("ok");
        }
        for (k, v) in self.violations.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

pub fn validate_guarded(machine: &GuardedMachine) -> ValidationReport {
    let mut out = Vec::new();
    check_signature(&machine.sig, &mut out);
    check_guarded_transitions(&machine.sig, &machine.transitions, &mut out);
    for state in &machine.sig.states {
        for input in &machine.sig.inputs {
            check_coverage(state, input, &machine.transitions, Bound::Infinite, &mut out);
        }
    }
    ValidationReport { violations: out }
}

pub fn validate_timeout(machine: &TimeoutMachine) -> ValidationReport {
    let mut out = Vec::new();
    let sig = &machine.sig;
    check_signature(sig, &mut out);
    for t in &machine.transitions {
        check_refs(sig, &t.source, &t.input, &t.output, &t.target, &mut out);
    }
    for state in &sig.states {
        for input in &sig.inputs {
            let n = machine.transitions.iter().filter(|t| &t.source == state && &t.input == input).count();
            match n {
                0 => out.push(Violation::MissingTransition { state: state.clone(), input: input.clone() }),
                1 => {}
                _ => out.push(Violation::DuplicateTransition { state: state.clone(), input: input.clone() }),
            }
        }
    }
    check_timeouts(sig, &machine.timeouts, &mut out);
    ValidationReport { violations: out }
}

pub fn validate_general(machine: &GeneralMachine) -> ValidationReport {
    let mut out = Vec::new();
    let sig = &machine.sig;
    check_signature(sig, &mut out);
    check_guarded_transitions(sig, &machine.transitions, &mut out);
    check_timeouts(sig, &machine.timeouts, &mut out);
    for t in &machine.transitions {
        if let Bound::Finite(d) = machine.timeout(&t.source) {
            if !t.guard.strictly_below(Bound::Finite(d)) {
                out.push(Violation::GuardExceedsTimeout {
                    state: t.source.clone(),
                    input: t.input.clone(),
                    guard: t.guard,
                    timeout: d,
                });
            }
        }
    }
    for state in &sig.states {
        let limit = match machine.timeout(state) {
            Bound::Finite(0) => continue,
            d => d,
        };
        for input in &sig.inputs {
            check_coverage(state, input, &machine.transitions, limit, &mut out);
        }
    }
    ValidationReport { violations: out }
}

impl Machine {
    pub fn validate(&self) -> ValidationReport {
        match self {
            Machine::Guarded(m) => validate_guarded(m),
            Machine::Timeout(m) => validate_timeout(m),
            Machine::General(m) => validate_general(m),
        }
    }
}

fn check_signature(sig: &Signature, out: &mut Vec<Violation>) {
    for (component, items) in [("states", &sig.states), ("inputs", &sig.inputs), ("outputs", &sig.outputs)] {
        if items.is_empty() {
            out.push(Violation::EmptyComponent { component });
        }
        let mut seen = HashSet::new();
        for x in items {
            if !seen.insert(x) {
                out.push(Violation::DuplicateName { name: x.clone() });
            }
        }
    }
    let mut owner = HashSet::new();
    let mut clashes = Vec::new();
    for items in [&sig.states, &sig.inputs, &sig.outputs] {
        let local: HashSet<&String> = items.iter().collect();
        for x in local {
            if !owner.insert(x) && !clashes.contains(x) {
                clashes.push(x.clone());
            }
        }
    }
    clashes.sort();
    out.extend(clashes.into_iter().map(|name| Violation::NameClash { name }));
    if !sig.has_state(&sig.initial) {
        out.push(Violation::UnknownInitial { state: sig.initial.clone() });
    }
}

fn check_refs(sig: &Signature, source: &str, input: &str, output: &str, target: &str, out: &mut Vec<Violation>) {
    for s in [source, target] {
        if !sig.has_state(s) {
            out.push(Violation::UnknownState { state: s.into() });
        }
    }
    if !sig.inputs.iter().any(|x| x == input) {
        out.push(Violation::UnknownInput { input: input.into() });
    }
    if !sig.outputs.iter().any(|x| x == output) {
        out.push(Violation::UnknownOutput { output: output.into() });
    }
}

fn check_guarded_transitions(sig: &Signature, transitions: &[GuardedTransition], out: &mut Vec<Violation>) {
    for t in transitions {
        check_refs(sig, &t.source, &t.input, &t.output, &t.target, out);
    }
}

fn check_timeouts(sig: &Signature, timeouts: &TimeoutMap, out: &mut Vec<Violation>) {
    for state in &sig.states {
        match timeouts.get(state) {
            None => out.push(Violation::MissingTimeout { state: state.clone() }),
            Some(t) => {
                if t.duration == Bound::Finite(0) {
                    out.push(Violation::NonPositiveTimeout { state: state.clone() });
                }
                if !t.duration.is_infinite() && !sig.has_state(&t.target) {
                    out.push(Violation::UnknownState { state: t.target.clone() });
                }
            }
        }
    }
    for state in timeouts.keys() {
        if !sig.has_state(state) {
            out.push(Violation::UnknownState { state: state.clone() });
        }
    }
}

/// Checks that the guards of `(state, input)` partition `[0, limit)`.
/// Reports at most one gap and one overlap, each at its smallest region.
fn check_coverage(state: &str, input: &str, transitions: &[GuardedTransition], limit: Bound, out: &mut Vec<Violation>) {
    let guards: Vec<Guard> =
        transitions.iter().filter(|t| t.source == state && t.input == input).map(|t| t.guard).collect();
    let bound = guards.iter().flat_map(|g| g.constants()).chain(limit.finite()).max().unwrap_or(0).max(1);
    let regions = interval_set(bound).expect("bound >= 1");
    let mut gap = None;
    let mut overlap = None;
    for r in regions.into_iter().filter(|r| region_below(*r, limit)) {
        let hits = guards.iter().filter(|g| g.contains_region(r)).count();
        if hits == 0 && gap.is_none() {
            gap = Some(r.representative());
        }
        if hits > 1 && overlap.is_none() {
            overlap = Some(r.representative());
        }
    }
    if let Some(witness) = gap {
        out.push(Violation::Gap { state: state.into(), input: input.into(), witness });
    }
    if let Some(witness) = overlap {
        out.push(Violation::Overlap { state: state.into(), input: input.into(), witness });
    }
}

fn region_below(r: Region, limit: Bound) -> bool {
    match (r, limit) {
        (_, Bound::Infinite) => true,
        (Region::Point(n), Bound::Finite(d)) => n < d,
        (Region::Open(n), Bound::Finite(d)) => n < d,
        (Region::Tail(_), Bound::Finite(_)) => false,
    }
}
