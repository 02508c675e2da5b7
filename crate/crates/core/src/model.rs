//! Machine records, guards, timed words and timed states.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::region::Region;
use crate::time::{format_time, int, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("empty guard {0}: equal endpoints need both sides closed")]
    EmptyGuard(String),
    #[error("guard lower bound {lower} exceeds upper bound {upper}")]
    InvertedGuard { lower: u64, upper: u64 },
    #[error("guard with infinite upper bound cannot be right-closed")]
    ClosedInfinity,
    #[error("negative timestamp {0} at position {1}")]
    NegativeTimestamp(String, usize),
    #[error("timestamps decrease at position {0}")]
    DecreasingTimestamps(usize),
    #[error("timestamps not strictly increasing at position {0}")]
    RepeatedTimestamp(usize),
}

/// Upper end of a guard or a timeout duration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Bound {
    Finite(u64),
    Infinite,
}

impl Bound {
    pub fn finite(self) -> Option<u64> {
        match self {
            Bound::Finite(n) => Some(n),
            Bound::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        self == Bound::Infinite
    }

    /// `x < self`, with every value below infinity.
    pub fn exceeds(self, x: &Rational) -> bool {
        match self {
            Bound::Finite(n) => *x < int(n),
            Bound::Infinite => true,
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Finite(n) => write!(f, "{n}"),
            Bound::Infinite => f.write_str("inf"),
        }
    }
}

/// An interval `⟨lower, upper⟩` with integer endpoints, possibly
/// right-unbounded. Empty intervals cannot be constructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Guard {
    lower: u64,
    lower_closed: bool,
    upper: Bound,
    upper_closed: bool,
}

impl Guard {
    pub fn new(lower: u64, lower_closed: bool, upper: Bound, upper_closed: bool) -> Result<Self, ModelError> {
        match upper {
            Bound::Infinite if upper_closed => return Err(ModelError::ClosedInfinity),
            Bound::Finite(u) if u < lower => return Err(ModelError::InvertedGuard { lower, upper: u }),
            Bound::Finite(u) if u == lower && !(lower_closed && upper_closed) => {
                let g = Guard { lower, lower_closed, upper, upper_closed };
                return Err(ModelError::EmptyGuard(g.to_string()));
            }
            _ => {}
        }
        Ok(Guard { lower, lower_closed, upper, upper_closed })
    }

    /// `[a,b)`
    pub fn closed_open(a: u64, b: u64) -> Self {
        Self::new(a, true, Bound::Finite(b), false).expect("a < b")
    }

    /// `[a,b]`
    pub fn closed(a: u64, b: u64) -> Self {
        Self::new(a, true, Bound::Finite(b), true).expect("a <= b")
    }

    /// `(a,b)`
    pub fn open(a: u64, b: u64) -> Self {
        Self::new(a, false, Bound::Finite(b), false).expect("a < b")
    }

    /// `(a,b]`
    pub fn open_closed(a: u64, b: u64) -> Self {
        Self::new(a, false, Bound::Finite(b), true).expect("a < b")
    }

    /// `[a,∞)`
    pub fn at_least(a: u64) -> Self {
        Guard { lower: a, lower_closed: true, upper: Bound::Infinite, upper_closed: false }
    }

    /// `(a,∞)`
    pub fn above(a: u64) -> Self {
        Guard { lower: a, lower_closed: false, upper: Bound::Infinite, upper_closed: false }
    }

    /// `[0,d)`, or `[0,∞)` when `d` is infinite.
    pub fn below(d: Bound) -> Self {
        match d {
            Bound::Finite(d) => Guard::closed_open(0, d),
            Bound::Infinite => Guard::at_least(0),
        }
    }

    pub fn lower(&self) -> u64 {
        self.lower
    }

    pub fn lower_closed(&self) -> bool {
        self.lower_closed
    }

    pub fn upper(&self) -> Bound {
        self.upper
    }

    pub fn upper_closed(&self) -> bool {
        self.upper_closed
    }

    pub fn contains(&self, x: &Rational) -> bool {
        let lo = int(self.lower);
        let above_lower = if self.lower_closed { *x >= lo } else { *x > lo };
        let below_upper = match self.upper {
            Bound::Infinite => true,
            Bound::Finite(u) if self.upper_closed => *x <= int(u),
            Bound::Finite(u) => *x < int(u),
        };
        above_lower && below_upper
    }

    /// Exact region containment `region ⊆ self`.
    pub fn contains_region(&self, region: Region) -> bool {
        match region {
            Region::Point(n) => self.contains(&int(n)),
            Region::Open(n) => {
                self.lower <= n
                    && match self.upper {
                        Bound::Infinite => true,
                        Bound::Finite(u) => u > n,
                    }
            }
            Region::Tail(n) => self.upper.is_infinite() && self.lower <= n,
        }
    }

    /// Left-closed, right-open: `[a,b)` or `[a,∞)`.
    pub fn is_lcro(&self) -> bool {
        self.lower_closed && !self.upper_closed
    }

    /// Every point of the guard lies strictly below `limit`.
    pub fn strictly_below(&self, limit: Bound) -> bool {
        match (self.upper, limit) {
            (_, Bound::Infinite) => true,
            (Bound::Infinite, Bound::Finite(_)) => false,
            (Bound::Finite(u), Bound::Finite(d)) => u < d || (u == d && !self.upper_closed),
        }
    }

    /// The guard translated right by `n` time units.
    pub fn shifted(&self, n: u64) -> Self {
        Guard {
            lower: self.lower + n,
            upper: match self.upper {
                Bound::Finite(u) => Bound::Finite(u + n),
                Bound::Infinite => Bound::Infinite,
            },
            ..*self
        }
    }

    /// Finite endpoints of the guard.
    pub fn constants(&self) -> impl Iterator<Item = u64> {
        std::iter::once(self.lower).chain(self.upper.finite())
    }
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let open = if self.lower_closed { '[' } else { '(' };
        let close = if self.upper_closed { ']' } else { ')' };
        write!(f, "{open}{},{}{close}", self.lower, self.upper)
    }
}

/// What every machine variant shares: `S`, `I`, `O` and `s₀`.
/// Declaration order is kept; it fixes the alphabet order of abstractions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    pub states: Vec<String>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub initial: String,
}

impl Signature {
    pub fn new<S: Into<String>>(
        states: impl IntoIterator<Item = S>,
        inputs: impl IntoIterator<Item = S>,
        outputs: impl IntoIterator<Item = S>,
        initial: impl Into<String>,
    ) -> Self {
        Signature {
            states: states.into_iter().map(Into::into).collect(),
            inputs: inputs.into_iter().map(Into::into).collect(),
            outputs: outputs.into_iter().map(Into::into).collect(),
            initial: initial.into(),
        }
    }

    pub fn has_state(&self, s: &str) -> bool {
        self.states.iter().any(|x| x == s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GuardedTransition {
    pub source: String,
    pub input: String,
    pub guard: Guard,
    pub output: String,
    pub target: String,
}

impl GuardedTransition {
    pub fn new(source: &str, input: &str, guard: Guard, output: &str, target: &str) -> Self {
        GuardedTransition {
            source: source.into(),
            input: input.into(),
            guard,
            output: output.into(),
            target: target.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IoTransition {
    pub source: String,
    pub input: String,
    pub output: String,
    pub target: String,
}

impl IoTransition {
    pub fn new(source: &str, input: &str, output: &str, target: &str) -> Self {
        IoTransition { source: source.into(), input: input.into(), output: output.into(), target: target.into() }
    }
}

/// `Δ(s) = (target, duration)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Timeout {
    pub target: String,
    pub duration: Bound,
}

impl Timeout {
    pub fn after(duration: u64, target: &str) -> Self {
        Timeout { target: target.into(), duration: Bound::Finite(duration) }
    }

    pub fn never(state: &str) -> Self {
        Timeout { target: state.into(), duration: Bound::Infinite }
    }
}

pub type TimeoutMap = BTreeMap<String, Timeout>;

/// Rewrites the targets of infinite timeouts to the owning state.
pub(crate) fn normalize_timeouts(timeouts: &mut TimeoutMap) {
    for (state, t) in timeouts.iter_mut() {
        if t.duration.is_infinite() {
            t.target = state.clone();
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GuardedMachine {
    pub sig: Signature,
    pub transitions: Vec<GuardedTransition>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimeoutMachine {
    pub sig: Signature,
    pub transitions: Vec<IoTransition>,
    pub timeouts: TimeoutMap,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneralMachine {
    pub sig: Signature,
    pub transitions: Vec<GuardedTransition>,
    pub timeouts: TimeoutMap,
}

impl GuardedMachine {
    pub fn new(sig: Signature, transitions: Vec<GuardedTransition>) -> Self {
        GuardedMachine { sig, transitions }
    }

    /// Greatest finite guard endpoint, clamped below at 1.
    pub fn max_constant(&self) -> u64 {
        guard_constant(&self.transitions).max(1)
    }

    pub fn transitions_from<'a>(
        &'a self,
        state: &'a str,
        input: &'a str,
    ) -> impl Iterator<Item = &'a GuardedTransition> + 'a {
        self.transitions.iter().filter(move |t| t.source == state && t.input == input)
    }
}

impl TimeoutMachine {
    pub fn new(sig: Signature, transitions: Vec<IoTransition>, mut timeouts: TimeoutMap) -> Self {
        normalize_timeouts(&mut timeouts);
        TimeoutMachine { sig, transitions, timeouts }
    }

    /// Greatest finite timeout, clamped below at 1.
    pub fn max_constant(&self) -> u64 {
        timeout_constant(&self.timeouts).max(1)
    }

    pub fn timeout(&self, state: &str) -> Bound {
        timeout_duration(&self.timeouts, state)
    }
}

impl GeneralMachine {
    pub fn new(sig: Signature, transitions: Vec<GuardedTransition>, mut timeouts: TimeoutMap) -> Self {
        normalize_timeouts(&mut timeouts);
        GeneralMachine { sig, transitions, timeouts }
    }

    pub fn max_constant(&self) -> u64 {
        guard_constant(&self.transitions).max(timeout_constant(&self.timeouts)).max(1)
    }

    pub fn timeout(&self, state: &str) -> Bound {
        timeout_duration(&self.timeouts, state)
    }
}

fn guard_constant(transitions: &[GuardedTransition]) -> u64 {
    transitions.iter().flat_map(|t| t.guard.constants()).max().unwrap_or(0)
}

fn timeout_constant(timeouts: &TimeoutMap) -> u64 {
    timeouts.values().filter_map(|t| t.duration.finite()).max().unwrap_or(0)
}

// A state without an entry never times out; validation reports the gap.
fn timeout_duration(timeouts: &TimeoutMap, state: &str) -> Bound {
    timeouts.get(state).map_or(Bound::Infinite, |t| t.duration)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MachineKind {
    Guarded,
    Timeout,
    General,
}

impl MachineKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MachineKind::Guarded => "guarded",
            MachineKind::Timeout => "timeout",
            MachineKind::General => "general",
        }
    }
}

impl fmt::Display for MachineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Any of the three machine variants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Machine {
    Guarded(GuardedMachine),
    Timeout(TimeoutMachine),
    General(GeneralMachine),
}

impl Machine {
    pub fn kind(&self) -> MachineKind {
        match self {
            Machine::Guarded(_) => MachineKind::Guarded,
            Machine::Timeout(_) => MachineKind::Timeout,
            Machine::General(_) => MachineKind::General,
        }
    }

    pub fn signature(&self) -> &Signature {
        match self {
            Machine::Guarded(m) => &m.sig,
            Machine::Timeout(m) => &m.sig,
            Machine::General(m) => &m.sig,
        }
    }

    pub fn max_constant(&self) -> u64 {
        match self {
            Machine::Guarded(m) => m.max_constant(),
            Machine::Timeout(m) => m.max_constant(),
            Machine::General(m) => m.max_constant(),
        }
    }
}

impl From<GuardedMachine> for Machine {
    fn from(m: GuardedMachine) -> Self {
        Machine::Guarded(m)
    }
}

impl From<TimeoutMachine> for Machine {
    fn from(m: TimeoutMachine) -> Self {
        Machine::Timeout(m)
    }
}

impl From<GeneralMachine> for Machine {
    fn from(m: GeneralMachine) -> Self {
        Machine::General(m)
    }
}

/// A finite sequence of symbols with non-negative, non-decreasing
/// rational timestamps.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TimedWord {
    entries: Vec<(String, Rational)>,
}

impl TimedWord {
    pub fn new(entries: Vec<(String, Rational)>) -> Result<Self, ModelError> {
        let mut prev = Rational::zero();
        for (k, (_, t)) in entries.iter().enumerate() {
            if t.is_negative() {
                return Err(ModelError::NegativeTimestamp(format_time(t), k));
            }
            if *t < prev {
                return Err(ModelError::DecreasingTimestamps(k));
            }
            prev = t.clone();
        }
        Ok(TimedWord { entries })
    }

    /// Like [`TimedWord::new`] but also rejects repeated timestamps.
    pub fn new_strict(entries: Vec<(String, Rational)>) -> Result<Self, ModelError> {
        let word = Self::new(entries)?;
        match word.entries.windows(2).position(|w| w[0].1 == w[1].1) {
            Some(k) => Err(ModelError::RepeatedTimestamp(k + 1)),
            None => Ok(word),
        }
    }

    /// Builds a word from per-entry delays (the first delay is measured from 0).
    pub fn from_delays(delays: Vec<(String, Rational)>) -> Result<Self, ModelError> {
        let mut now = Rational::zero();
        let entries = delays
            .into_iter()
            .map(|(a, d)| {
                now += d;
                (a, now.clone())
            })
            .collect();
        Self::new(entries)
    }

    pub fn empty() -> Self {
        TimedWord::default()
    }

    pub fn entries(&self) -> &[(String, Rational)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `(symbol, t_j − t_{j−1})` with `t_0 = 0`.
    pub fn delays(&self) -> impl Iterator<Item = (&str, Rational)> + '_ {
        let mut prev = Rational::zero();
        self.entries.iter().map(move |(a, t)| {
            let d = t - &prev;
            prev = t.clone();
            (a.as_str(), d)
        })
    }

    pub fn is_strictly_increasing(&self) -> bool {
        self.entries.windows(2).all(|w| w[0].1 < w[1].1)
    }

    pub fn symbols(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(a, _)| a.as_str())
    }
}

impl fmt::Display for TimedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.is_empty() {
            return f.write_str("ε");
        }
        for (a, t) in &self.entries {
            write!(f, "({a},{})", format_time(t))?;
        }
        Ok(())
    }
}

/// Drops the timestamps of a timed word.
pub fn untime(word: &TimedWord) -> Vec<String> {
    word.symbols().map(str::to_string).collect()
}

/// A control state paired with a clock value.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TimedState {
    pub state: String,
    pub clock: Rational,
}

impl TimedState {
    pub fn new(state: &str, clock: Rational) -> Self {
        TimedState { state: state.into(), clock }
    }

    pub fn at_zero(state: &str) -> Self {
        TimedState { state: state.into(), clock: Rational::zero() }
    }
}

impl fmt::Display for TimedState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.state, format_time(&self.clock))
    }
}
