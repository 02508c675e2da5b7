//! Finite verification of bisimulations between a timed machine and an
//! untimed abstraction.
//!
//! A relation pairs sets of timed states, described by a control state and
//! a clock class, with abstract states. Guard membership, floors and
//! integer timeouts are constant on every class, so each class is checked
//! through a single representative clock and a single representative delay.

use std::fmt;

use thiserror::Error;

use crate::abstraction::{AbstractSymbol, AbstractionKind, ClockTag, UntimedFsm};
use crate::model::{Bound, Machine, TimedState};
use crate::region::{interval_set, Region};
use crate::semantics::TimedSemantics;
use crate::time::{int, ratio, Rational};

/// A set of clock values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClockClass {
    /// Every clock value; states of guarded machines.
    Any,
    /// `[n, n+1)`.
    Floor(u64),
    /// `[n, ∞)`.
    FromFloor(u64),
    Region(Region),
}

impl ClockClass {
    pub fn contains(&self, x: &Rational) -> bool {
        match self {
            ClockClass::Any => true,
            ClockClass::Floor(n) => *x >= int(*n) && *x < int(n + 1),
            ClockClass::FromFloor(n) => *x >= int(*n),
            ClockClass::Region(r) => r.contains(x),
        }
    }

    fn representative(&self) -> Rational {
        match self {
            ClockClass::Any => int(0),
            ClockClass::Floor(n) | ClockClass::FromFloor(n) => int(*n) + ratio(1, 2),
            ClockClass::Region(r) => r.representative(),
        }
    }
}

impl fmt::Display for ClockClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClockClass::Any => f.write_str("x>=0"),
            ClockClass::Floor(n) => write!(f, "floor(x)={n}"),
            ClockClass::FromFloor(n) => write!(f, "x>={n}"),
            ClockClass::Region(r) => write!(f, "x in {r}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RelatedPair {
    pub state: String,
    pub clock: ClockClass,
    /// Index into the abstract machine's states.
    pub abstract_state: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RegionRelation {
    pub pairs: Vec<RelatedPair>,
}

impl RegionRelation {
    fn relates(&self, ts: &TimedState, abstract_state: usize) -> bool {
        self.pairs
            .iter()
            .any(|p| p.abstract_state == abstract_state && p.state == ts.state && p.clock.contains(&ts.clock))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed relation: {reason}")]
pub struct MalformedRelation {
    pub reason: String,
}

fn malformed(reason: impl Into<String>) -> MalformedRelation {
    MalformedRelation { reason: reason.into() }
}

/// The first failing bisimulation condition, numbered as in the
/// definition: 1 and 2 relate delays with delay symbols (or, for guarded
/// machines, timed transitions with region-tagged inputs) in both
/// directions, 3 and 4 relate input/output transitions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BisimulationViolation {
    pub condition: u8,
    pub pair: RelatedPair,
    pub abstract_name: String,
    pub symbol: AbstractSymbol,
    pub reason: String,
}

impl fmt::Display for BisimulationViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "condition {} fails for ({}, {}) ~ {} on {}: {}",
            self.condition, self.pair.state, self.pair.clock, self.abstract_name, self.symbol, self.reason
        )
    }
}

/// The relations under which a machine and its own abstraction are
/// bisimilar: the identity on states for guarded machines, clock floors for
/// timeout machines and clock regions for general machines.
pub fn canonical_relation(machine: &Machine, fsm: &UntimedFsm) -> RegionRelation {
    let pairs = fsm
        .states()
        .iter()
        .enumerate()
        .map(|(k, a)| {
            let clock = match (&a.clock, machine) {
                (ClockTag::Untimed, _) => ClockClass::Any,
                (ClockTag::Index(n), Machine::Timeout(m)) if m.timeout(&a.source).is_infinite() => {
                    ClockClass::FromFloor(*n)
                }
                (ClockTag::Index(n), _) => ClockClass::Floor(*n),
                (ClockTag::Region(r), _) => ClockClass::Region(*r),
            };
            RelatedPair { state: a.source.clone(), clock, abstract_state: k }
        })
        .collect();
    RegionRelation { pairs }
}

fn timeout_of(machine: &Machine, state: &str) -> Bound {
    match machine {
        Machine::Guarded(_) => Bound::Infinite,
        Machine::Timeout(m) => m.timeout(state),
        Machine::General(m) => m.timeout(state),
    }
}

fn check_well_formed(
    machine: &Machine,
    fsm: &UntimedFsm,
    rel: &RegionRelation,
) -> Result<Vec<Region>, MalformedRelation> {
    let regions = match (machine, fsm.kind()) {
        (Machine::Guarded(_), AbstractionKind::Regions { bound })
        | (Machine::General(_), AbstractionKind::Tick { bound })
            if bound >= machine.max_constant() =>
        {
            interval_set(bound).map_err(|e| malformed(e.to_string()))?
        }
        (Machine::Timeout(_), AbstractionKind::One) => Vec::new(),
        (_, kind) => {
            return Err(malformed(format!("a {} machine does not match the abstraction {kind:?}", machine.kind())))
        }
    };
    for p in &rel.pairs {
        if !machine.signature().has_state(&p.state) {
            return Err(malformed(format!("unknown state `{}`", p.state)));
        }
        if p.abstract_state >= fsm.states().len() {
            return Err(malformed(format!("abstract state index {} out of range", p.abstract_state)));
        }
        let timeout = timeout_of(machine, &p.state);
        let fits = match (machine, p.clock) {
            (Machine::Guarded(_), ClockClass::Any) => true,
            (Machine::Timeout(_), ClockClass::Floor(n)) => timeout.exceeds(&int(n)),
            (Machine::Timeout(_), ClockClass::FromFloor(_)) => timeout.is_infinite(),
            (Machine::General(_), ClockClass::Region(r)) => {
                regions.contains(&r) && timeout.exceeds(&r.representative())
            }
            _ => false,
        };
        if !fits {
            return Err(malformed(format!("clock class {} does not fit state `{}`", p.clock, p.state)));
        }
    }
    Ok(regions)
}

/// One representative move of the timed machine: the output it produces
/// and the timed state it reaches.
type Move = Option<(AbstractSymbol, TimedState)>;

fn io_move(machine: &Machine, at: &TimedState, input: &str) -> Move {
    machine.fire(at, input).ok().map(|(output, target)| (AbstractSymbol::Plain(output), TimedState::at_zero(&target)))
}

/// Checks that `rel` is a bisimulation between `machine` and `fsm`.
/// Returns the first violation, or `None` when every condition holds.
pub fn check_region_bisimulation(
    machine: &Machine,
    fsm: &UntimedFsm,
    rel: &RegionRelation,
) -> Result<Option<BisimulationViolation>, MalformedRelation> {
    let regions = check_well_formed(machine, fsm, rel)?;
    let inputs = &machine.signature().inputs;
    for pair in &rel.pairs {
        let x = pair.clock.representative();
        let here = TimedState::new(&pair.state, x.clone());
        // (symbol, timed move, condition for timed-to-abstract)
        let mut moves: Vec<(AbstractSymbol, Move, u8)> = Vec::new();
        match machine {
            Machine::Guarded(_) => {
                for i in inputs {
                    for r in &regions {
                        let at = TimedState::new(&pair.state, r.representative());
                        moves.push((AbstractSymbol::timed(i, *r), io_move(machine, &at, i), 1));
                    }
                }
            }
            Machine::Timeout(_) => {
                let after = machine.delay(&here, &int(1));
                moves.push((AbstractSymbol::One, Some((AbstractSymbol::One, after)), 1));
                for i in inputs {
                    moves.push((AbstractSymbol::plain(i), io_move(machine, &here, i), 3));
                }
            }
            Machine::General(_) => {
                let after = machine.delay(&here, &ratio(1, 2));
                moves.push((AbstractSymbol::Tick, Some((AbstractSymbol::Tick, after)), 1));
                for i in inputs {
                    moves.push((AbstractSymbol::plain(i), io_move(machine, &here, i), 3));
                }
            }
        }
        for (symbol, timed, forward) in moves {
            let edge = fsm.symbol_index(&symbol).and_then(|k| fsm.edge(pair.abstract_state, k));
            let fail = |condition: u8, reason: String| {
                Some(BisimulationViolation {
                    condition,
                    pair: pair.clone(),
                    abstract_name: fsm.states()[pair.abstract_state].to_string(),
                    symbol: symbol.clone(),
                    reason,
                })
            };
            if let Some((output, next)) = &timed {
                match edge {
                    None => return Ok(fail(forward, format!("no abstract transition matches output {output}"))),
                    Some(e) if e.output != *output => {
                        return Ok(fail(forward, format!("timed output {output}, abstract output {}", e.output)))
                    }
                    Some(e) if !rel.relates(next, e.target) => {
                        let target = &fsm.states()[e.target];
                        return Ok(fail(forward, format!("successor {next} is not related to {target}")));
                    }
                    Some(_) => {}
                }
            }
            if let Some(e) = edge {
                let backward = forward + 1;
                match &timed {
                    None => return Ok(fail(backward, format!("no timed transition produces {}", e.output))),
                    Some((output, _)) if *output != e.output => {
                        return Ok(fail(backward, format!("abstract output {}, timed output {output}", e.output)))
                    }
                    Some((_, next)) if !rel.relates(next, e.target) => {
                        let target = &fsm.states()[e.target];
                        return Ok(fail(backward, format!("successor {next} is not related to {target}")));
                    }
                    Some(_) => {}
                }
            }
        }
    }
    Ok(None)
}
