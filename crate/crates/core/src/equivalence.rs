//! Equivalence checking through the untimed abstractions, and lifting of
//! abstract counterexamples back to timed words.

use std::collections::hash_map::Entry;
use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use num_traits::Zero;
use thiserror::Error;

use crate::abstraction::{
    abstract_general_with_bound, abstract_guarded, abstract_timeout, AbstractSymbol, AbstractionError, UntimedFsm,
};
use crate::model::{GeneralMachine, GuardedMachine, Signature, TimedWord, TimeoutMachine};
use crate::semantics::{run, SemanticsError, TimedSemantics};
use crate::time::{int, ratio, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LiftError {
    #[error("{count} delay symbol(s) after the last input")]
    TrailingTicks { count: usize },
    #[error("unexpected symbol `{symbol}` for this abstraction")]
    UnexpectedSymbol { symbol: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EquivalenceError {
    #[error("{component} differ: {left:?} vs {right:?}")]
    AlphabetMismatch { component: &'static str, left: Vec<String>, right: Vec<String> },
    #[error(transparent)]
    Abstraction(#[from] AbstractionError),
    #[error(transparent)]
    Lift(#[from] LiftError),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error("abstract counterexample {word} does not separate the timed machines")]
    SpuriousCounterexample { word: String },
}

/// A word separating two untimed machines, with both output words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbstractCounterexample {
    pub word: Vec<AbstractSymbol>,
    pub outputs_a: Vec<AbstractSymbol>,
    pub outputs_b: Vec<AbstractSymbol>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FsmVerdict {
    Equivalent,
    Distinguished(AbstractCounterexample),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub abstract_word: Vec<AbstractSymbol>,
    pub abstract_outputs_a: Vec<AbstractSymbol>,
    pub abstract_outputs_b: Vec<AbstractSymbol>,
    /// The lifted timed input word.
    pub word: TimedWord,
    pub outputs_a: TimedWord,
    pub outputs_b: TimedWord,
    /// Index of the first differing output.
    pub divergence: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Equivalent,
    Inequivalent(Box<Counterexample>),
}

impl Verdict {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, Verdict::Equivalent)
    }

    pub fn counterexample(&self) -> Option<&Counterexample> {
        match self {
            Verdict::Equivalent => None,
            Verdict::Inequivalent(c) => Some(c),
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Equivalent => f.write_str("equivalent"),
            Verdict::Inequivalent(c) => {
                writeln!(f, "not equivalent")?;
                writeln!(f, "abstract word:  {}", join(&c.abstract_word))?;
                writeln!(f, "timed word:     {}", c.word)?;
                writeln!(f, "outputs (a):    {}", c.outputs_a)?;
                writeln!(f, "outputs (b):    {}", c.outputs_b)?;
                write!(f, "divergence at:  {}", c.divergence)
            }
        }
    }
}

pub fn join(word: &[AbstractSymbol]) -> String {
    if word.is_empty() {
        return "ε".into();
    }
    word.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(" ")
}

type Pair = (usize, usize);

/// Breadth-first search of the product of two deterministic machines.
/// Symbols are tried in the order of `a`'s alphabet, so the returned word
/// is the shortest one and, among those, the first in that order.
pub fn fsm_equivalent(a: &UntimedFsm, b: &UntimedFsm) -> Result<FsmVerdict, EquivalenceError> {
    let left: BTreeSet<&AbstractSymbol> = a.alphabet().iter().collect();
    let right: BTreeSet<&AbstractSymbol> = b.alphabet().iter().collect();
    if left != right {
        return Err(EquivalenceError::AlphabetMismatch {
            component: "alphabets",
            left: a.alphabet().iter().map(|s| s.to_string()).collect(),
            right: b.alphabet().iter().map(|s| s.to_string()).collect(),
        });
    }
    let to_b: Vec<usize> = a.alphabet().iter().map(|s| b.symbol_index(s).expect("same alphabet")).collect();

    let start = (a.initial(), b.initial());
    let mut parent: HashMap<Pair, Option<(Pair, usize)>> = HashMap::from([(start, None)]);
    let mut queue = VecDeque::from([start]);
    while let Some(pair) = queue.pop_front() {
        for (k, &kb) in to_b.iter().enumerate() {
            let next = match (a.edge(pair.0, k), b.edge(pair.1, kb)) {
                (None, None) => continue,
                (Some(ea), Some(eb)) if ea.output == eb.output => (ea.target, eb.target),
                _ => {
                    let mut word = vec![a.alphabet()[k].clone()];
                    let mut cursor = pair;
                    while let Some(Some((prev, sym))) = parent.get(&cursor) {
                        word.push(a.alphabet()[*sym].clone());
                        cursor = *prev;
                    }
                    word.reverse();
                    return Ok(FsmVerdict::Distinguished(AbstractCounterexample {
                        outputs_a: partial_outputs(a, &word),
                        outputs_b: partial_outputs(b, &word),
                        word,
                    }));
                }
            };
            if let Entry::Vacant(slot) = parent.entry(next) {
                slot.insert(Some((pair, k)));
                queue.push_back(next);
            }
        }
    }
    Ok(FsmVerdict::Equivalent)
}

/// Outputs along `word`, stopping where a transition is undefined.
fn partial_outputs(fsm: &UntimedFsm, word: &[AbstractSymbol]) -> Vec<AbstractSymbol> {
    let mut state = fsm.initial();
    let mut out = Vec::new();
    for a in word {
        match fsm.edge_on(state, a) {
            Some(e) => {
                out.push(e.output.clone());
                state = e.target;
            }
            None => break,
        }
    }
    out
}

fn check_signatures(a: &Signature, b: &Signature) -> Result<(), EquivalenceError> {
    for (component, x, y) in [("inputs", &a.inputs, &b.inputs), ("outputs", &a.outputs, &b.outputs)] {
        let left: BTreeSet<&String> = x.iter().collect();
        let right: BTreeSet<&String> = y.iter().collect();
        if left != right {
            return Err(EquivalenceError::AlphabetMismatch { component, left: x.clone(), right: y.clone() });
        }
    }
    Ok(())
}

/// Replays a lifted word on both timed machines and locates the first
/// differing output.
pub(crate) fn confirm<A, B>(
    a: &A,
    b: &B,
    cx: AbstractCounterexample,
    lift: fn(&[AbstractSymbol]) -> Result<TimedWord, LiftError>,
) -> Result<Verdict, EquivalenceError>
where
    A: TimedSemantics + ?Sized,
    B: TimedSemantics + ?Sized,
{
    let word = lift(&cx.word)?;
    let ra = run(a, &word)?;
    let rb = run(b, &word)?;
    let divergence = ra
        .outputs
        .entries()
        .iter()
        .zip(rb.outputs.entries())
        .position(|(x, y)| x.0 != y.0)
        .ok_or_else(|| EquivalenceError::SpuriousCounterexample { word: join(&cx.word) })?;
    Ok(Verdict::Inequivalent(Box::new(Counterexample {
        abstract_word: cx.word,
        abstract_outputs_a: cx.outputs_a,
        abstract_outputs_b: cx.outputs_b,
        word,
        outputs_a: ra.outputs,
        outputs_b: rb.outputs,
        divergence,
    })))
}

pub fn guarded_equivalent(m1: &GuardedMachine, m2: &GuardedMachine) -> Result<Verdict, EquivalenceError> {
    check_signatures(&m1.sig, &m2.sig)?;
    let n = m1.max_constant().max(m2.max_constant());
    match fsm_equivalent(&abstract_guarded(m1, n)?, &abstract_guarded(m2, n)?)? {
        FsmVerdict::Equivalent => Ok(Verdict::Equivalent),
        FsmVerdict::Distinguished(cx) => confirm(m1, m2, cx, lift_regions),
    }
}

pub fn timeout_equivalent(m1: &TimeoutMachine, m2: &TimeoutMachine) -> Result<Verdict, EquivalenceError> {
    check_signatures(&m1.sig, &m2.sig)?;
    match fsm_equivalent(&abstract_timeout(m1), &abstract_timeout(m2))? {
        FsmVerdict::Equivalent => Ok(Verdict::Equivalent),
        FsmVerdict::Distinguished(cx) => confirm(m1, m2, cx, lift_one),
    }
}

pub fn general_equivalent(m1: &GeneralMachine, m2: &GeneralMachine) -> Result<Verdict, EquivalenceError> {
    match general_abstract_verdict(m1, m2)? {
        FsmVerdict::Equivalent => Ok(Verdict::Equivalent),
        FsmVerdict::Distinguished(cx) => confirm(m1, m2, cx, lift_tick),
    }
}

pub(crate) fn general_abstract_verdict(
    m1: &GeneralMachine,
    m2: &GeneralMachine,
) -> Result<FsmVerdict, EquivalenceError> {
    check_signatures(&m1.sig, &m2.sig)?;
    let n = m1.max_constant().max(m2.max_constant());
    fsm_equivalent(&abstract_general_with_bound(m1, n)?, &abstract_general_with_bound(m2, n)?)
}

/// Region-tagged inputs to a timed word with representative delays.
pub fn lift_regions(word: &[AbstractSymbol]) -> Result<TimedWord, LiftError> {
    let mut delays = Vec::with_capacity(word.len());
    for a in word {
        match a {
            AbstractSymbol::Timed { input, region } => delays.push((input.clone(), region.representative())),
            other => return Err(LiftError::UnexpectedSymbol { symbol: other.to_string() }),
        }
    }
    Ok(TimedWord::from_delays(delays).expect("representatives are non-negative"))
}

/// Splits a tick-interleaved word into `(ticks before, input)` runs.
fn tick_runs(word: &[AbstractSymbol], tick: &AbstractSymbol) -> Result<Vec<(u64, String)>, LiftError> {
    let mut runs = Vec::new();
    let mut count = 0u64;
    for a in word {
        match a {
            _ if a == tick => count += 1,
            AbstractSymbol::Plain(i) => {
                runs.push((count, i.clone()));
                count = 0;
            }
            other => return Err(LiftError::UnexpectedSymbol { symbol: other.to_string() }),
        }
    }
    if count > 0 {
        return Err(LiftError::TrailingTicks { count: count as usize });
    }
    Ok(runs)
}

/// `k` copies of `𝟙` before an input become the delay `k + 1/2`.
pub fn lift_one(word: &[AbstractSymbol]) -> Result<TimedWord, LiftError> {
    let delays = tick_runs(word, &AbstractSymbol::One)?.into_iter().map(|(k, i)| (i, int(k) + ratio(1, 2))).collect();
    Ok(TimedWord::from_delays(delays).expect("positive delays"))
}

/// `2n` copies of `𝕥` become the delay `n`, `2n + 1` copies `n + 1/2`.
pub fn lift_tick(word: &[AbstractSymbol]) -> Result<TimedWord, LiftError> {
    let delays = tick_runs(word, &AbstractSymbol::Tick)?
        .into_iter()
        .map(|(k, i)| {
            let half = if k % 2 == 1 { ratio(1, 2) } else { Rational::zero() };
            (i, int(k / 2) + half)
        })
        .collect();
    Ok(TimedWord::from_delays(delays).expect("non-negative delays"))
}
