//! Untimed abstractions of timed machines and timed words.
//!
//! * Guarded machines abstract to an FSM over `I × ℐ_N`: each input is
//!   tagged with the region of the delay since the previous input.
//! * Timeout machines abstract to an FSM over `I ∪ {𝟙}` whose states track
//!   the integer part of the clock; `𝟙` is one time unit without input.
//! * Machines with guards and timeouts abstract to an FSM over `I ∪ {𝕥}`
//!   whose states track the clock region; `𝕥` moves from a point region to
//!   the next open region or from an open region to the next point.
//!
//! Only states reachable from the abstract initial state are built, except
//! for guarded machines where the abstract states are the machine states.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Bound, GeneralMachine, GuardedMachine, Machine, TimedWord, TimeoutMachine};
use crate::region::{classify, interval_set, Region, RegionError};
use crate::time::{floor_u64, is_integer, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AbstractionError {
    #[error("abstraction bound {bound} is below the machine constant {max}")]
    BoundBelowMaxConstant { bound: u64, max: u64 },
    #[error(transparent)]
    Region(#[from] RegionError),
}

/// Input and output letters of the abstract machines.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AbstractSymbol {
    Plain(String),
    Timed {
        input: String,
        region: Region,
    },
    /// One time unit without input.
    One,
    /// Half a region step without input.
    Tick,
}

impl AbstractSymbol {
    pub fn plain(s: &str) -> Self {
        AbstractSymbol::Plain(s.into())
    }

    pub fn timed(input: &str, region: Region) -> Self {
        AbstractSymbol::Timed { input: input.into(), region }
    }

    pub fn is_delay(&self) -> bool {
        matches!(self, AbstractSymbol::One | AbstractSymbol::Tick)
    }
}

impl fmt::Display for AbstractSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AbstractSymbol::Plain(s) => f.write_str(s),
            AbstractSymbol::Timed { input, region } => write!(f, "({input},{region})"),
            AbstractSymbol::One => f.write_str("𝟙"),
            AbstractSymbol::Tick => f.write_str("𝕥"),
        }
    }
}

/// Clock information carried by an abstract state.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClockTag {
    /// Guarded abstraction: states are machine states.
    Untimed,
    /// Integer part of the clock.
    Index(u64),
    Region(Region),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AbstractState {
    pub source: String,
    pub clock: ClockTag,
}

impl AbstractState {
    pub fn untimed(source: &str) -> Self {
        AbstractState { source: source.into(), clock: ClockTag::Untimed }
    }

    pub fn indexed(source: &str, n: u64) -> Self {
        AbstractState { source: source.into(), clock: ClockTag::Index(n) }
    }

    pub fn region(source: &str, r: Region) -> Self {
        AbstractState { source: source.into(), clock: ClockTag::Region(r) }
    }
}

impl fmt::Display for AbstractState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.clock {
            ClockTag::Untimed => f.write_str(&self.source),
            ClockTag::Index(n) => write!(f, "({},{n})", self.source),
            ClockTag::Region(r) => write!(f, "({},{r})", self.source),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "family")]
pub enum AbstractionKind {
    Regions { bound: u64 },
    One,
    Tick { bound: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub target: usize,
    pub output: AbstractSymbol,
}

/// A deterministic Mealy machine over abstract symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UntimedFsm {
    kind: AbstractionKind,
    states: Vec<AbstractState>,
    alphabet: Vec<AbstractSymbol>,
    initial: usize,
    table: Vec<Vec<Option<Edge>>>,
}

impl UntimedFsm {
    /// Assembles a machine from explicit parts. `table[s][a]` is the edge
    /// of state `s` on `alphabet[a]`.
    pub fn from_parts(
        kind: AbstractionKind,
        states: Vec<AbstractState>,
        alphabet: Vec<AbstractSymbol>,
        initial: usize,
        table: Vec<Vec<Option<Edge>>>,
    ) -> Self {
        assert_eq!(states.len(), table.len(), "one row per state");
        assert!(table.iter().all(|row| row.len() == alphabet.len()), "one column per symbol");
        assert!(initial < states.len());
        UntimedFsm { kind, states, alphabet, initial, table }
    }

    pub fn kind(&self) -> AbstractionKind {
        self.kind
    }

    pub fn states(&self) -> &[AbstractState] {
        &self.states
    }

    pub fn alphabet(&self) -> &[AbstractSymbol] {
        &self.alphabet
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn state_index(&self, s: &AbstractState) -> Option<usize> {
        self.states.iter().position(|x| x == s)
    }

    pub fn symbol_index(&self, a: &AbstractSymbol) -> Option<usize> {
        self.alphabet.iter().position(|x| x == a)
    }

    pub fn edge(&self, state: usize, symbol: usize) -> Option<&Edge> {
        self.table.get(state)?.get(symbol)?.as_ref()
    }

    pub fn edge_on(&self, state: usize, symbol: &AbstractSymbol) -> Option<&Edge> {
        self.edge(state, self.symbol_index(symbol)?)
    }

    /// All defined transitions as `(source, symbol index, edge)`.
    pub fn transitions(&self) -> impl Iterator<Item = (usize, usize, &Edge)> {
        self.table
            .iter()
            .enumerate()
            .flat_map(|(s, row)| row.iter().enumerate().filter_map(move |(a, e)| e.as_ref().map(|e| (s, a, e))))
    }

    pub fn transition_count(&self) -> usize {
        self.transitions().count()
    }

    /// Replaces the output of one transition, returning the previous one.
    pub fn set_output(&mut self, state: usize, symbol: usize, output: AbstractSymbol) -> Option<AbstractSymbol> {
        let edge = self.table.get_mut(state)?.get_mut(symbol)?.as_mut()?;
        Some(std::mem::replace(&mut edge.output, output))
    }

    /// Runs a word from the initial state; `None` if some letter is outside
    /// the alphabet or undefined on the way.
    pub fn run(&self, word: &[AbstractSymbol]) -> Option<(usize, Vec<AbstractSymbol>)> {
        let mut state = self.initial;
        let mut out = Vec::with_capacity(word.len());
        for a in word {
            let e = self.edge_on(state, a)?;
            out.push(e.output.clone());
            state = e.target;
        }
        Some((state, out))
    }
}

/// Breadth-first construction from `seeds`; the first seed is initial.
fn explore<F>(
    kind: AbstractionKind,
    seeds: Vec<AbstractState>,
    alphabet: Vec<AbstractSymbol>,
    successor: F,
) -> UntimedFsm
where
    F: Fn(&AbstractState, &AbstractSymbol) -> Option<(AbstractState, AbstractSymbol)>,
{
    let mut index: HashMap<AbstractState, usize> = HashMap::new();
    let mut states = Vec::new();
    let mut queue = VecDeque::new();
    for s in seeds {
        if !index.contains_key(&s) {
            index.insert(s.clone(), states.len());
            queue.push_back(states.len());
            states.push(s);
        }
    }
    let mut table: Vec<Vec<Option<Edge>>> = vec![Vec::new(); states.len()];
    while let Some(current) = queue.pop_front() {
        let mut row = Vec::with_capacity(alphabet.len());
        for a in &alphabet {
            let edge = successor(&states[current], a).map(|(next, output)| {
                let target = *index.entry(next.clone()).or_insert_with(|| {
                    states.push(next);
                    table.push(Vec::new());
                    queue.push_back(states.len() - 1);
                    states.len() - 1
                });
                Edge { target, output }
            });
            row.push(edge);
        }
        table[current] = row;
    }
    UntimedFsm { kind, states, alphabet, initial: 0, table }
}

fn check_bound(bound: u64, max: u64) -> Result<(), AbstractionError> {
    if bound < max {
        return Err(AbstractionError::BoundBelowMaxConstant { bound, max });
    }
    Ok(())
}

/// The region abstraction `A^N_M`: one transition `(i, r)/o` for every
/// region `r ∈ ℐ_N` contained in the guard of an `i/o` transition.
pub fn abstract_guarded(machine: &GuardedMachine, bound: u64) -> Result<UntimedFsm, AbstractionError> {
    check_bound(bound, machine.max_constant())?;
    let regions = interval_set(bound)?;
    let alphabet =
        machine.sig.inputs.iter().flat_map(|i| regions.iter().map(move |r| AbstractSymbol::timed(i, *r))).collect();
    let mut seeds = vec![AbstractState::untimed(&machine.sig.initial)];
    seeds.extend(machine.sig.states.iter().map(|s| AbstractState::untimed(s)));
    let mut fsm = explore(AbstractionKind::Regions { bound }, seeds, alphabet, |state, a| {
        let AbstractSymbol::Timed { input, region } = a else { return None };
        machine
            .transitions_from(&state.source, input)
            .find(|t| t.guard.contains_region(*region))
            .map(|t| (AbstractState::untimed(&t.target), AbstractSymbol::Plain(t.output.clone())))
    });
    // Keep states in declaration order.
    let order: Vec<usize> = machine
        .sig
        .states
        .iter()
        .filter_map(|s| fsm.state_index(&AbstractState::untimed(s)))
        .chain(0..fsm.states.len())
        .fold(Vec::new(), |mut acc, k| {
            if !acc.contains(&k) {
                acc.push(k);
            }
            acc
        });
    fsm = permute(fsm, &order);
    Ok(fsm)
}

/// Reorders states so that new state `k` is old state `order[k]`.
fn permute(fsm: UntimedFsm, order: &[usize]) -> UntimedFsm {
    let mut new_of_old = vec![0; order.len()];
    for (new, &old) in order.iter().enumerate() {
        new_of_old[old] = new;
    }
    let states = order.iter().map(|&o| fsm.states[o].clone()).collect();
    let table = order
        .iter()
        .map(|&o| {
            fsm.table[o]
                .iter()
                .map(|e| e.as_ref().map(|e| Edge { target: new_of_old[e.target], output: e.output.clone() }))
                .collect()
        })
        .collect();
    UntimedFsm { kind: fsm.kind, states, alphabet: fsm.alphabet, initial: new_of_old[fsm.initial], table }
}

/// The `𝟙`-abstraction: states `(s, n)` with `n` the integer part of the
/// clock, `𝟙/𝟙` advancing `n` or jumping on timeout expiry, and input
/// transitions copied from the machine.
pub fn abstract_timeout(machine: &TimeoutMachine) -> UntimedFsm {
    let mut alphabet: Vec<AbstractSymbol> = machine.sig.inputs.iter().map(|i| AbstractSymbol::plain(i)).collect();
    alphabet.push(AbstractSymbol::One);
    let seeds = vec![AbstractState::indexed(&machine.sig.initial, 0)];
    explore(AbstractionKind::One, seeds, alphabet, |state, a| {
        let ClockTag::Index(n) = state.clock else { return None };
        match a {
            AbstractSymbol::Plain(input) => machine
                .transitions
                .iter()
                .find(|t| t.source == state.source && &t.input == input)
                .map(|t| (AbstractState::indexed(&t.target, 0), AbstractSymbol::Plain(t.output.clone()))),
            AbstractSymbol::One => {
                let next = match machine.timeouts.get(&state.source).map(|t| (t.duration, &t.target)) {
                    Some((Bound::Finite(d), _)) if n + 1 < d => AbstractState::indexed(&state.source, n + 1),
                    Some((Bound::Finite(d), target)) if n + 1 == d => AbstractState::indexed(target, 0),
                    Some((Bound::Finite(_), _)) => return None,
                    Some((Bound::Infinite, _)) | None if n == 0 => state.clone(),
                    _ => return None,
                };
                Some((next, AbstractSymbol::One))
            }
            _ => None,
        }
    })
}

/// The `𝕥`-abstraction with the bound `max(M)`.
pub fn abstract_general(machine: &GeneralMachine) -> UntimedFsm {
    abstract_general_with_bound(machine, machine.max_constant()).expect("bound equals the machine constant")
}

/// The `𝕥`-abstraction over `ℐ_N` for any `N ≥ max(M)`.
pub fn abstract_general_with_bound(machine: &GeneralMachine, bound: u64) -> Result<UntimedFsm, AbstractionError> {
    check_bound(bound, machine.max_constant())?;
    let mut alphabet: Vec<AbstractSymbol> = machine.sig.inputs.iter().map(|i| AbstractSymbol::plain(i)).collect();
    alphabet.push(AbstractSymbol::Tick);
    let seeds = vec![AbstractState::region(&machine.sig.initial, Region::Point(0))];
    Ok(explore(AbstractionKind::Tick { bound }, seeds, alphabet, |state, a| {
        let ClockTag::Region(region) = state.clock else { return None };
        match a {
            AbstractSymbol::Plain(input) => machine
                .transitions
                .iter()
                .find(|t| t.source == state.source && &t.input == input && t.guard.contains_region(region))
                .map(|t| (AbstractState::region(&t.target, Region::Point(0)), AbstractSymbol::Plain(t.output.clone()))),
            AbstractSymbol::Tick => {
                let timeout = machine.timeouts.get(&state.source).map(|t| (t.duration, t.target.as_str()));
                tick_successor(&state.source, region, timeout, bound).map(|next| (next, AbstractSymbol::Tick))
            }
            _ => None,
        }
    }))
}

fn tick_successor(state: &str, region: Region, timeout: Option<(Bound, &str)>, bound: u64) -> Option<AbstractState> {
    let duration = timeout.map_or(Bound::Infinite, |(d, _)| d);
    let next = match (region, duration) {
        (Region::Point(n), Bound::Finite(d)) if n < d => Region::Open(n),
        (Region::Point(n), Bound::Infinite) if n < bound => Region::Open(n),
        (Region::Point(_), Bound::Infinite) => Region::Tail(bound),
        (Region::Open(n), Bound::Finite(d)) if n + 1 < d => Region::Point(n + 1),
        (Region::Open(n), Bound::Finite(d)) if n + 1 == d => {
            let target = timeout.map(|(_, t)| t).unwrap_or(state);
            return Some(AbstractState::region(target, Region::Point(0)));
        }
        (Region::Open(n), Bound::Infinite) => Region::Point(n + 1),
        (Region::Tail(_), Bound::Infinite) => region,
        _ => return None,
    };
    Some(AbstractState::region(state, next))
}

/// Picks the abstraction matching the machine variant. `bound` applies to
/// the region-based abstractions and defaults to `max(M)`.
pub fn abstract_machine(machine: &Machine, bound: Option<u64>) -> Result<UntimedFsm, AbstractionError> {
    match machine {
        Machine::Guarded(m) => abstract_guarded(m, bound.unwrap_or_else(|| m.max_constant())),
        Machine::Timeout(m) => Ok(abstract_timeout(m)),
        Machine::General(m) => abstract_general_with_bound(m, bound.unwrap_or_else(|| m.max_constant())),
    }
}

/// `ℐ_N(v)`: each symbol tagged with the region of its delay.
pub fn abstract_word_regions(word: &TimedWord, bound: u64) -> Vec<AbstractSymbol> {
    word.delays().map(|(a, d)| AbstractSymbol::timed(a, classify(&d, bound))).collect()
}

/// `𝟙(v)`: `⌊d⌋` copies of `𝟙` before each symbol, `d` its delay.
pub fn abstract_word_one(word: &TimedWord) -> Vec<AbstractSymbol> {
    let mut out = Vec::new();
    for (a, d) in word.delays() {
        out.extend(std::iter::repeat_n(AbstractSymbol::One, floor_u64(&d) as usize));
        out.push(AbstractSymbol::plain(a));
    }
    out
}

/// Number of `𝕥` letters encoding a delay: `2d` for integers, `2⌊d⌋+1`
/// otherwise.
pub fn tick_count(delay: &Rational) -> u64 {
    let whole = floor_u64(delay);
    if is_integer(delay) {
        2 * whole
    } else {
        2 * whole + 1
    }
}

/// `𝕥(v)`.
pub fn abstract_word_tick(word: &TimedWord) -> Vec<AbstractSymbol> {
    let mut out = Vec::new();
    for (a, d) in word.delays() {
        out.extend(std::iter::repeat_n(AbstractSymbol::Tick, tick_count(&d) as usize));
        out.push(AbstractSymbol::plain(a));
    }
    out
}
