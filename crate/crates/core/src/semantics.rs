//! Timed operational semantics of the three machine variants.
//!
//! A run alternates delays and input/output steps. Delays only advance the
//! clock for guarded machines; machines with timeouts follow the chain of
//! expiring timeouts, jumping to the timeout target with the clock reset
//! whenever the clock reaches the duration. A delay that lands exactly on
//! a timeout jumps before the next input is read.

use std::fmt;

use num_traits::Zero;
use thiserror::Error;

use crate::model::{
    Bound, GeneralMachine, GuardedMachine, Machine, Signature, TimedState, TimedWord, TimeoutMachine, TimeoutMap,
};
use crate::time::{format_time, int, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("no transition enabled for input `{input}` at {state}")]
    NoEnabledTransition { state: TimedState, input: String },
}

/// Machines that carry a timeout function.
pub trait HasTimeouts {
    fn timeout_map(&self) -> &TimeoutMap;
}

impl HasTimeouts for TimeoutMachine {
    fn timeout_map(&self) -> &TimeoutMap {
        &self.timeouts
    }
}

impl HasTimeouts for GeneralMachine {
    fn timeout_map(&self) -> &TimeoutMap {
        &self.timeouts
    }
}

/// The two transition relations of a timed machine.
pub trait TimedSemantics {
    fn signature(&self) -> &Signature;

    /// The timed transition `(s,x) --t--> (s',x')`.
    fn delay(&self, ts: &TimedState, t: &Rational) -> TimedState;

    /// The input/output transition enabled at `ts`, as `(output, target)`.
    fn fire(&self, ts: &TimedState, input: &str) -> Result<(String, String), SemanticsError>;
}

/// `(s,x) --t--> (s,x+t)`.
pub fn delay_guarded(_machine: &GuardedMachine, ts: &TimedState, t: &Rational) -> TimedState {
    TimedState { state: ts.state.clone(), clock: &ts.clock + t }
}

/// Follows timeout expiries: while the remaining delay reaches the timeout
/// of the current state, jump to its target with clock 0. Terminates since
/// each jump consumes at least one time unit.
pub fn delay_timeout<M: HasTimeouts + ?Sized>(machine: &M, ts: &TimedState, t: &Rational) -> TimedState {
    let timeouts = machine.timeout_map();
    let mut state = ts.state.clone();
    let mut clock = ts.clock.clone();
    let mut remaining = t.clone();
    while let Some(entry) = timeouts.get(&state) {
        let Bound::Finite(d) = entry.duration else { break };
        let until_expiry = int(d) - &clock;
        if remaining < until_expiry {
            break;
        }
        remaining -= until_expiry;
        state = entry.target.clone();
        clock = Rational::zero();
    }
    TimedState { state, clock: clock + remaining }
}

impl TimedSemantics for GuardedMachine {
    fn signature(&self) -> &Signature {
        &self.sig
    }

    fn delay(&self, ts: &TimedState, t: &Rational) -> TimedState {
        delay_guarded(self, ts, t)
    }

    fn fire(&self, ts: &TimedState, input: &str) -> Result<(String, String), SemanticsError> {
        self.transitions_from(&ts.state, input)
            .find(|t| t.guard.contains(&ts.clock))
            .map(|t| (t.output.clone(), t.target.clone()))
            .ok_or_else(|| no_transition(ts, input))
    }
}

impl TimedSemantics for TimeoutMachine {
    fn signature(&self) -> &Signature {
        &self.sig
    }

    fn delay(&self, ts: &TimedState, t: &Rational) -> TimedState {
        delay_timeout(self, ts, t)
    }

    fn fire(&self, ts: &TimedState, input: &str) -> Result<(String, String), SemanticsError> {
        if !self.timeout(&ts.state).exceeds(&ts.clock) {
            return Err(no_transition(ts, input));
        }
        self.transitions
            .iter()
            .find(|t| t.source == ts.state && t.input == input)
            .map(|t| (t.output.clone(), t.target.clone()))
            .ok_or_else(|| no_transition(ts, input))
    }
}

impl TimedSemantics for GeneralMachine {
    fn signature(&self) -> &Signature {
        &self.sig
    }

    fn delay(&self, ts: &TimedState, t: &Rational) -> TimedState {
        delay_timeout(self, ts, t)
    }

    fn fire(&self, ts: &TimedState, input: &str) -> Result<(String, String), SemanticsError> {
        self.transitions
            .iter()
            .find(|t| t.source == ts.state && t.input == input && t.guard.contains(&ts.clock))
            .map(|t| (t.output.clone(), t.target.clone()))
            .ok_or_else(|| no_transition(ts, input))
    }
}

impl TimedSemantics for Machine {
    fn signature(&self) -> &Signature {
        Machine::signature(self)
    }

    fn delay(&self, ts: &TimedState, t: &Rational) -> TimedState {
        match self {
            Machine::Guarded(m) => m.delay(ts, t),
            Machine::Timeout(m) => m.delay(ts, t),
            Machine::General(m) => m.delay(ts, t),
        }
    }

    fn fire(&self, ts: &TimedState, input: &str) -> Result<(String, String), SemanticsError> {
        match self {
            Machine::Guarded(m) => m.fire(ts, input),
            Machine::Timeout(m) => m.fire(ts, input),
            Machine::General(m) => m.fire(ts, input),
        }
    }
}

fn no_transition(ts: &TimedState, input: &str) -> SemanticsError {
    SemanticsError::NoEnabledTransition { state: ts.clone(), input: input.into() }
}

/// Delay by `delay`, then read `input`. Returns the post-transition state
/// (clock 0) and the produced output.
pub fn step<M: TimedSemantics + ?Sized>(
    machine: &M,
    ts: &TimedState,
    delay: &Rational,
    input: &str,
) -> Result<(TimedState, String), SemanticsError> {
    let waited = machine.delay(ts, delay);
    let (output, target) = machine.fire(&waited, input)?;
    Ok((TimedState::at_zero(&target), output))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceStep {
    Delay { from: TimedState, delay: Rational, to: TimedState },
    Io { from: TimedState, input: String, output: String, to: TimedState },
}

impl fmt::Display for TraceStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceStep::Delay { from, delay, to } => write!(f, "{from} --{}--> {to}", format_time(delay)),
            TraceStep::Io { from, input, output, to } => write!(f, "{from} --{input}/{output}--> {to}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RunTrace {
    pub steps: Vec<TraceStep>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Run {
    pub final_state: TimedState,
    pub outputs: TimedWord,
    pub trace: RunTrace,
}

/// Runs `word` from `(s₀, 0)`. Outputs carry the input timestamps.
pub fn run<M: TimedSemantics + ?Sized>(machine: &M, word: &TimedWord) -> Result<Run, SemanticsError> {
    let mut current = TimedState::at_zero(&machine.signature().initial);
    let mut steps = Vec::with_capacity(2 * word.len());
    let mut outputs = Vec::with_capacity(word.len());
    for ((input, delay), (_, stamp)) in word.delays().zip(word.entries()) {
        let waited = machine.delay(&current, &delay);
        let (output, target) = machine.fire(&waited, input)?;
        let next = TimedState::at_zero(&target);
        steps.push(TraceStep::Delay { from: current, delay, to: waited.clone() });
        steps.push(TraceStep::Io { from: waited, input: input.to_string(), output: output.clone(), to: next.clone() });
        outputs.push((output, stamp.clone()));
        current = next;
    }
    let outputs = TimedWord::new(outputs).expect("timestamps copied from a valid word");
    Ok(Run { final_state: current, outputs, trace: RunTrace { steps } })
}
