//! Conversions between the machine variants.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::equivalence::{confirm, general_abstract_verdict, lift_tick, EquivalenceError, FsmVerdict, Verdict};
use crate::model::{
    Bound, GeneralMachine, Guard, GuardedMachine, GuardedTransition, Machine, Signature, Timeout, TimeoutMachine,
    TimeoutMap,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error("timeouts form the cycle [{}]", .cycle.join(","))]
    NotLoopFree { cycle: Vec<String> },
    #[error("guard {} on ({}, {}) is not left-closed right-open", .transition.guard, .transition.source, .transition.input)]
    NotLcro { transition: Box<GuardedTransition> },
}

/// A cycle of finite timeouts, starting from the first state (in
/// declaration order) that lies on one.
pub fn timeout_cycle(machine: &TimeoutMachine) -> Option<Vec<String>> {
    let next = |s: &str| -> Option<String> {
        let t = machine.timeouts.get(s)?;
        (!t.duration.is_infinite()).then(|| t.target.clone())
    };
    let mut done: BTreeSet<String> = BTreeSet::new();
    for start in &machine.sig.states {
        let mut path: Vec<String> = Vec::new();
        let mut current = Some(start.clone());
        while let Some(s) = current {
            if done.contains(&s) {
                break;
            }
            if let Some(k) = path.iter().position(|p| *p == s) {
                return Some(path[k..].to_vec());
            }
            current = next(&s);
            path.push(s);
        }
        done.extend(path);
    }
    None
}

pub fn is_timeout_loop_free(machine: &TimeoutMachine) -> bool {
    timeout_cycle(machine).is_none()
}

/// Turns a timeout machine without timeout cycles into a guarded machine.
///
/// Every input transition of `s` first gets the guard `[0, Δ(s))`. States
/// are then resolved along the timeout chain: a state with timeout
/// `(s', d)` receives the resolved transitions of `s'` shifted by `d`.
pub fn loopfree_timeout_to_guarded(machine: &TimeoutMachine) -> Result<GuardedMachine, TransformError> {
    if let Some(cycle) = timeout_cycle(machine) {
        return Err(TransformError::NotLoopFree { cycle });
    }
    let mut resolved: BTreeMap<String, Vec<GuardedTransition>> = BTreeMap::new();
    for state in &machine.sig.states {
        resolve(machine, state, &mut resolved);
    }
    let transitions = machine.sig.states.iter().flat_map(|s| resolved.remove(s).unwrap_or_default()).collect();
    Ok(GuardedMachine::new(machine.sig.clone(), transitions))
}

fn resolve(machine: &TimeoutMachine, state: &str, resolved: &mut BTreeMap<String, Vec<GuardedTransition>>) {
    if resolved.contains_key(state) {
        return;
    }
    let duration = machine.timeout(state);
    let mut own: Vec<GuardedTransition> = machine
        .transitions
        .iter()
        .filter(|t| t.source == state)
        .map(|t| GuardedTransition::new(state, &t.input, Guard::below(duration), &t.output, &t.target))
        .collect();
    if let Bound::Finite(d) = duration {
        let target = machine.timeouts[state].target.clone();
        resolve(machine, &target, resolved);
        own.extend(resolved[&target].iter().map(|t| GuardedTransition {
            source: state.to_string(),
            guard: t.guard.shifted(d),
            ..t.clone()
        }));
    }
    resolved.insert(state.to_string(), own);
}

/// The first transition whose guard is not of the form `[a, b)` or `[a, ∞)`.
pub fn lcro_violation(machine: &GuardedMachine) -> Option<&GuardedTransition> {
    machine.transitions.iter().find(|t| !t.guard.is_lcro())
}

pub fn is_lcro(machine: &GuardedMachine) -> bool {
    lcro_violation(machine).is_none()
}

fn window_name(state: &str, lo: u64, hi: Bound) -> String {
    format!("{state}@[{lo},{hi})")
}

/// Boundaries `0 = t_0 < t_1 < … < t_m` of the windows of `state`; the
/// last window is `[t_m, ∞)`.
fn boundaries(machine: &GuardedMachine, state: &str) -> Vec<u64> {
    let mut points: BTreeSet<u64> = BTreeSet::from([0]);
    for t in machine.transitions.iter().filter(|t| t.source == state) {
        points.extend(t.guard.constants());
    }
    points.into_iter().collect()
}

fn windows(points: &[u64]) -> impl Iterator<Item = (u64, Bound)> + '_ {
    points.iter().enumerate().map(|(k, &lo)| (lo, points.get(k + 1).map_or(Bound::Infinite, |&h| Bound::Finite(h))))
}

/// Turns a guarded machine whose guards are all left-closed right-open
/// into a timeout machine over states `(s, [t_k, t_{k+1}))`.
pub fn lcro_guarded_to_timeout(machine: &GuardedMachine) -> Result<TimeoutMachine, TransformError> {
    if let Some(t) = lcro_violation(machine) {
        return Err(TransformError::NotLcro { transition: Box::new(t.clone()) });
    }
    let points: BTreeMap<&str, Vec<u64>> =
        machine.sig.states.iter().map(|s| (s.as_str(), boundaries(machine, s))).collect();
    let entry = |s: &str| {
        let p = &points[s];
        window_name(s, 0, p.get(1).map_or(Bound::Infinite, |&h| Bound::Finite(h)))
    };

    let mut states = Vec::new();
    let mut transitions = Vec::new();
    let mut timeouts = TimeoutMap::new();
    for s in &machine.sig.states {
        let p = &points[s.as_str()];
        let ws: Vec<(u64, Bound)> = windows(p).collect();
        for (k, &(lo, hi)) in ws.iter().enumerate() {
            let name = window_name(s, lo, hi);
            for t in machine.transitions.iter().filter(|t| &t.source == s && t.guard.contains(&crate::time::int(lo))) {
                transitions.push(crate::model::IoTransition::new(&name, &t.input, &t.output, &entry(&t.target)));
            }
            let timeout = match (hi, ws.get(k + 1)) {
                (Bound::Finite(h), Some(&(nlo, nhi))) => Timeout::after(h - lo, &window_name(s, nlo, nhi)),
                _ => Timeout::never(&name),
            };
            timeouts.insert(name.clone(), timeout);
            states.push(name);
        }
    }
    let sig = Signature {
        states,
        inputs: machine.sig.inputs.clone(),
        outputs: machine.sig.outputs.clone(),
        initial: entry(&machine.sig.initial),
    };
    Ok(TimeoutMachine::new(sig, transitions, timeouts))
}

/// The same machine with every timeout infinite.
pub fn embed_guarded(machine: &GuardedMachine) -> GeneralMachine {
    let timeouts = machine.sig.states.iter().map(|s| (s.clone(), Timeout::never(s))).collect();
    GeneralMachine::new(machine.sig.clone(), machine.transitions.clone(), timeouts)
}

/// The same machine with each input transition of `s` guarded by `[0, Δ(s))`.
pub fn embed_timeout(machine: &TimeoutMachine) -> GeneralMachine {
    let transitions = machine
        .transitions
        .iter()
        .map(|t| {
            GuardedTransition::new(&t.source, &t.input, Guard::below(machine.timeout(&t.source)), &t.output, &t.target)
        })
        .collect();
    GeneralMachine::new(machine.sig.clone(), transitions, machine.timeouts.clone())
}

pub fn embed(machine: &Machine) -> GeneralMachine {
    match machine {
        Machine::Guarded(m) => embed_guarded(m),
        Machine::Timeout(m) => embed_timeout(m),
        Machine::General(m) => m.clone(),
    }
}

/// Equivalence of machines of any variants, decided on their embeddings.
/// Counterexamples are replayed on the original machines.
pub fn cross_equivalent(m1: &Machine, m2: &Machine) -> Result<Verdict, EquivalenceError> {
    match general_abstract_verdict(&embed(m1), &embed(m2))? {
        FsmVerdict::Equivalent => Ok(Verdict::Equivalent),
        FsmVerdict::Distinguished(cx) => confirm(m1, m2, cx, lift_tick),
    }
}
