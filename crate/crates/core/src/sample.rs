//! Seeded random machines and timed words for differential testing.
//!
//! Every generator produces complete, deterministic machines that pass
//! validation. Variant generators build machines with the same behavior as
//! their input by duplicating states, splitting guards or splitting
//! timeouts.

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::model::{
    Bound, GeneralMachine, Guard, GuardedMachine, GuardedTransition, IoTransition, Machine, Signature, TimedWord,
    Timeout, TimeoutMachine, TimeoutMap,
};
use crate::time::{int, ratio, Rational};

pub use rand::SeedableRng;

pub type SampleRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Size limits of generated machines and words.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_states: usize,
    pub max_inputs: usize,
    pub max_outputs: usize,
    /// Largest guard endpoint or finite timeout.
    pub max_constant: u64,
    pub max_word_len: usize,
    pub max_denominator: i64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_states: 4, max_inputs: 2, max_outputs: 3, max_constant: 3, max_word_len: 6, max_denominator: 4 }
    }
}

fn signature<R: Rng>(rng: &mut R, limits: &Limits) -> Signature {
    let n = rng.random_range(1..=limits.max_states);
    let i = rng.random_range(1..=limits.max_inputs);
    let o = rng.random_range(2..=limits.max_outputs.max(2));
    Signature::new(
        (0..n).map(|k| format!("s{k}")),
        ["a", "b", "c", "d"].iter().take(i).map(|s| s.to_string()),
        (1..=o).map(|k| format!("o{k}")),
        "s0",
    )
}

/// A random partition of `[0, limit)` into guards with endpoints at most
/// `max_constant`.
pub fn guard_partition<R: Rng>(rng: &mut R, max_constant: u64, limit: Bound) -> Vec<Guard> {
    let top = match limit {
        Bound::Finite(d) => d.saturating_sub(1).min(max_constant),
        Bound::Infinite => max_constant,
    };
    let cuts: Vec<u64> = (0..=top).filter(|_| rng.random_bool(0.4)).collect();
    let mut guards = Vec::new();
    let (mut lo, mut lo_closed) = (0, true);
    for c in cuts {
        if c == 0 {
            // Isolate the point 0.
            guards.push(Guard::closed(0, 0));
            lo_closed = false;
            continue;
        }
        match rng.random_range(0..3) {
            0 => {
                guards.push(Guard::new(lo, lo_closed, Bound::Finite(c), false).expect("non-empty"));
                lo_closed = true;
            }
            1 => {
                guards.push(Guard::new(lo, lo_closed, Bound::Finite(c), true).expect("non-empty"));
                lo_closed = false;
            }
            _ => {
                guards.push(Guard::new(lo, lo_closed, Bound::Finite(c), false).expect("non-empty"));
                guards.push(Guard::closed(c, c));
                lo_closed = false;
            }
        }
        lo = c;
    }
    guards.push(Guard::new(lo, lo_closed, limit, false).expect("non-empty"));
    guards
}

fn pick<'a, R: Rng>(rng: &mut R, items: &'a [String]) -> &'a str {
    items.choose(rng).expect("non-empty")
}

fn guarded_transitions<R: Rng>(
    rng: &mut R,
    sig: &Signature,
    limits: &Limits,
    limit: impl Fn(&str) -> Bound,
) -> Vec<GuardedTransition> {
    let mut out = Vec::new();
    for s in &sig.states {
        for i in &sig.inputs {
            for g in guard_partition(rng, limits.max_constant, limit(s)) {
                let o = pick(rng, &sig.outputs);
                let t = pick(rng, &sig.states);
                out.push(GuardedTransition::new(s, i, g, o, t));
            }
        }
    }
    out
}

fn io_transitions<R: Rng>(rng: &mut R, sig: &Signature) -> Vec<IoTransition> {
    let mut out = Vec::new();
    for s in &sig.states {
        for i in &sig.inputs {
            let o = pick(rng, &sig.outputs);
            let t = pick(rng, &sig.states);
            out.push(IoTransition::new(s, i, o, t));
        }
    }
    out
}

fn random_timeouts<R: Rng>(rng: &mut R, sig: &Signature, limits: &Limits) -> TimeoutMap {
    sig.states
        .iter()
        .map(|s| {
            let t = if rng.random_bool(0.25) {
                Timeout::never(s)
            } else {
                Timeout::after(rng.random_range(1..=limits.max_constant.max(1)), pick(rng, &sig.states))
            };
            (s.clone(), t)
        })
        .collect()
}

pub fn guarded<R: Rng>(rng: &mut R, limits: &Limits) -> GuardedMachine {
    let sig = signature(rng, limits);
    let transitions = guarded_transitions(rng, &sig, limits, |_| Bound::Infinite);
    GuardedMachine::new(sig, transitions)
}

pub fn timeout<R: Rng>(rng: &mut R, limits: &Limits) -> TimeoutMachine {
    let sig = signature(rng, limits);
    let transitions = io_transitions(rng, &sig);
    let timeouts = random_timeouts(rng, &sig, limits);
    TimeoutMachine::new(sig, transitions, timeouts)
}

/// A timeout machine whose finite timeouts only lead to later states, so
/// the timeout graph is acyclic.
pub fn loop_free_timeout<R: Rng>(rng: &mut R, limits: &Limits) -> TimeoutMachine {
    let sig = signature(rng, limits);
    let transitions = io_transitions(rng, &sig);
    let n = sig.states.len();
    let timeouts = sig
        .states
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let t = if k + 1 == n || rng.random_bool(0.2) {
                Timeout::never(s)
            } else {
                let target = &sig.states[rng.random_range(k + 1..n)];
                Timeout::after(rng.random_range(1..=limits.max_constant.max(1)), target)
            };
            (s.clone(), t)
        })
        .collect();
    TimeoutMachine::new(sig, transitions, timeouts)
}

pub fn general<R: Rng>(rng: &mut R, limits: &Limits) -> GeneralMachine {
    let sig = signature(rng, limits);
    let timeouts = random_timeouts(rng, &sig, limits);
    let transitions = guarded_transitions(rng, &sig, limits, |s| timeouts[s].duration);
    GeneralMachine::new(sig, transitions, timeouts)
}

/// A timed word over `inputs` whose timestamps share one denominator
/// `q ≤ max_denominator`, with delays reaching past `max_constant`.
pub fn timed_word<R: Rng>(rng: &mut R, inputs: &[String], limits: &Limits) -> TimedWord {
    let len = rng.random_range(0..=limits.max_word_len);
    let span = (limits.max_constant as i64 + 2).max(2);
    let q = rng.random_range(1..=limits.max_denominator.max(1));
    let delays = (0..len)
        .map(|_| {
            let p = if rng.random_bool(0.15) { 0 } else { rng.random_range(0..=span * q) };
            (pick(rng, inputs).to_string(), ratio(p, q))
        })
        .collect();
    TimedWord::from_delays(delays).expect("non-negative delays")
}

/// Splits a duplicate of one state off and redirects some transitions into
/// it. Behavior is unchanged.
fn duplicate_state<R: Rng>(rng: &mut R, sig: &mut Signature) -> Option<(String, String)> {
    let original = pick(rng, &sig.states).to_string();
    let copy = format!("{original}'");
    if sig.has_state(&copy) {
        return None;
    }
    sig.states.push(copy.clone());
    Some((original, copy))
}

pub fn equivalent_guarded<R: Rng>(rng: &mut R, machine: &GuardedMachine) -> GuardedMachine {
    let mut m = machine.clone();
    if let Some((orig, copy)) = duplicate_state(rng, &mut m.sig) {
        let copies: Vec<_> = m
            .transitions
            .iter()
            .filter(|t| t.source == orig)
            .map(|t| GuardedTransition { source: copy.clone(), ..t.clone() })
            .collect();
        for t in &mut m.transitions {
            if t.target == orig && rng.random_bool(0.5) {
                t.target = copy.clone();
            }
        }
        m.transitions.extend(copies);
    }
    split_guard(rng, &mut m.transitions);
    m
}

/// Replaces one guard with two adjacent pieces carrying the same output
/// and target.
fn split_guard<R: Rng>(rng: &mut R, transitions: &mut Vec<GuardedTransition>) {
    let candidates: Vec<usize> = (0..transitions.len())
        .filter(|&k| {
            let g = transitions[k].guard;
            g.upper().is_infinite() || g.upper().finite().unwrap() > g.lower()
        })
        .collect();
    let Some(&k) = candidates.choose(rng) else { return };
    let t = transitions[k].clone();
    let g = t.guard;
    let cut = g.lower() + 1;
    if !g.upper().is_infinite() && cut > g.upper().finite().unwrap() {
        return;
    }
    if g.upper() == Bound::Finite(cut) {
        // [l,l+1) style: split off the open interior from the left end.
        if !g.lower_closed() {
            return;
        }
        let left = Guard::closed(g.lower(), g.lower());
        let Ok(right) = Guard::new(g.lower(), false, g.upper(), g.upper_closed()) else { return };
        transitions[k].guard = left;
        transitions.push(GuardedTransition { guard: right, ..t });
        return;
    }
    let left = Guard::new(g.lower(), g.lower_closed(), Bound::Finite(cut), false).expect("non-empty");
    let right = Guard::new(cut, true, g.upper(), g.upper_closed()).expect("non-empty");
    transitions[k].guard = left;
    transitions.push(GuardedTransition { guard: right, ..t });
}

pub fn equivalent_timeout<R: Rng>(rng: &mut R, machine: &TimeoutMachine) -> TimeoutMachine {
    let mut m = machine.clone();
    if let Some((orig, copy)) = duplicate_state(rng, &mut m.sig) {
        let copies: Vec<_> = m
            .transitions
            .iter()
            .filter(|t| t.source == orig)
            .map(|t| IoTransition { source: copy.clone(), ..t.clone() })
            .collect();
        m.transitions.extend(copies);
        let mut timeout = m.timeouts[&orig].clone();
        if timeout.duration.is_infinite() {
            timeout.target = copy.clone();
        }
        for t in &mut m.transitions {
            if t.target == orig && rng.random_bool(0.5) {
                t.target = copy.clone();
            }
        }
        for t in m.timeouts.values_mut() {
            if t.target == orig && !t.duration.is_infinite() && rng.random_bool(0.5) {
                t.target = copy.clone();
            }
        }
        m.timeouts.insert(copy, timeout);
    }
    split_timeout(rng, &mut m);
    m
}

/// Routes a timeout `d ≥ 2` through a fresh state with the same input
/// transitions and the remaining duration `d - 1`.
fn split_timeout<R: Rng>(rng: &mut R, m: &mut TimeoutMachine) {
    let candidates: Vec<String> = m
        .sig
        .states
        .iter()
        .filter(|s| matches!(m.timeouts[*s].duration, Bound::Finite(d) if d >= 2))
        .cloned()
        .collect();
    let Some(s) = candidates.choose(rng).cloned() else { return };
    let mid = format!("{s}+1");
    if m.sig.has_state(&mid) {
        return;
    }
    let Timeout { target, duration: Bound::Finite(d) } = m.timeouts[&s].clone() else { return };
    let copies: Vec<_> = m
        .transitions
        .iter()
        .filter(|t| t.source == s)
        .map(|t| IoTransition { source: mid.clone(), ..t.clone() })
        .collect();
    m.transitions.extend(copies);
    m.timeouts.insert(s.clone(), Timeout::after(1, &mid));
    m.timeouts.insert(mid.clone(), Timeout::after(d - 1, &target));
    m.sig.states.push(mid);
}

pub fn equivalent_general<R: Rng>(rng: &mut R, machine: &GeneralMachine) -> GeneralMachine {
    let mut m = machine.clone();
    if let Some((orig, copy)) = duplicate_state(rng, &mut m.sig) {
        let copies: Vec<_> = m
            .transitions
            .iter()
            .filter(|t| t.source == orig)
            .map(|t| GuardedTransition { source: copy.clone(), ..t.clone() })
            .collect();
        m.transitions.extend(copies);
        let mut timeout = m.timeouts[&orig].clone();
        if timeout.duration.is_infinite() {
            timeout.target = copy.clone();
        }
        for t in &mut m.transitions {
            if t.target == orig && rng.random_bool(0.5) {
                t.target = copy.clone();
            }
        }
        m.timeouts.insert(copy, timeout);
    }
    split_guard(rng, &mut m.transitions);
    m
}

/// Changes the output of one random transition.
pub fn mutate_output<R: Rng>(rng: &mut R, machine: &Machine) -> Machine {
    let mut m = machine.clone();
    let outputs = m.signature().outputs.clone();
    let slot: &mut String = match &mut m {
        Machine::Guarded(g) => {
            let k = rng.random_range(0..g.transitions.len());
            &mut g.transitions[k].output
        }
        Machine::General(g) => {
            let k = rng.random_range(0..g.transitions.len());
            &mut g.transitions[k].output
        }
        Machine::Timeout(t) => {
            let k = rng.random_range(0..t.transitions.len());
            &mut t.transitions[k].output
        }
    };
    let others: Vec<&String> = outputs.iter().filter(|o| *o != slot).collect();
    if let Some(o) = others.choose(rng) {
        *slot = (*o).clone();
    }
    m
}

/// The largest value the generated words can reach.
pub fn word_horizon(limits: &Limits) -> Rational {
    int((limits.max_constant + 2) * limits.max_word_len as u64)
}
