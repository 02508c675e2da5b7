//! JSON documents for machines, timed words and abstractions, and the
//! machine-readable reports of the command-line tool.
//!
//! Serialization is canonical: object keys are sorted, transitions are
//! sorted, and state, input and output lists keep their declaration order.
//! Rationals are written as strings (`"5/2"`, `"3"`); parsing also accepts
//! decimal strings and JSON integers but never JSON floats.

use std::collections::BTreeMap;
use std::fmt;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value};
use thiserror::Error;

use crate::abstraction::{AbstractionKind, ClockTag, UntimedFsm};
use crate::bisim::BisimulationViolation;
use crate::equivalence::Verdict;
use crate::model::{
    Bound, GeneralMachine, Guard, GuardedMachine, GuardedTransition, IoTransition, Machine, MachineKind, ModelError,
    Signature, TimedState, TimedWord, Timeout, TimeoutMachine, TimeoutMap,
};
use crate::semantics::{Run, TraceStep};
use crate::time::{format_time, int, parse_time, Rational};
use crate::validate::{ValidationReport, Violation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatError {
    #[error("parse error at `{path}`: {message}")]
    Parse { path: String, line: usize, column: usize, message: String },
    #[error("`{path}`: {message}")]
    Structure { path: String, message: String },
    #[error("invalid machine:\n{0}")]
    Invalid(ValidationReport),
}

impl FormatError {
    fn structure(path: impl Into<String>, message: impl fmt::Display) -> Self {
        FormatError::Structure { path: path.into(), message: message.to_string() }
    }
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, FormatError> {
    let parse_error = |path: String, e: serde_json::Error| FormatError::Parse {
        path,
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    };
    let mut de = serde_json::Deserializer::from_str(text);
    let value = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        parse_error(path, e.into_inner())
    })?;
    de.end().map_err(|e| parse_error(".".into(), e))?;
    Ok(value)
}

fn to_canonical_string<T: Serialize>(value: &T) -> String {
    let value = serde_json::to_value(value).expect("documents serialize");
    let mut text = serde_json::to_string_pretty(&value).expect("values serialize");
    text.push('\n');
    text
}

/// A bound written as a JSON integer or the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct BoundDoc(pub Bound);

impl Serialize for BoundDoc {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0 {
            Bound::Finite(n) => s.serialize_u64(n),
            Bound::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for BoundDoc {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = BoundDoc;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a non-negative integer or \"inf\"")
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<BoundDoc, E> {
                Ok(BoundDoc(Bound::Finite(v)))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<BoundDoc, E> {
                match v.trim() {
                    "inf" | "∞" | "infinity" => Ok(BoundDoc(Bound::Infinite)),
                    t => t
                        .parse()
                        .map(|n| BoundDoc(Bound::Finite(n)))
                        .map_err(|_| E::invalid_value(de::Unexpected::Str(v), &self)),
                }
            }
        }
        d.deserialize_any(V)
    }
}

/// An exact timestamp: `"p/q"`, a decimal string or a JSON integer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimeDoc(pub Rational);

impl Serialize for TimeDoc {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_time(&self.0))
    }
}

impl<'de> Deserialize<'de> for TimeDoc {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = TimeDoc;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a rational string such as \"5/2\" or \"2.5\", or a non-negative integer")
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<TimeDoc, E> {
                Ok(TimeDoc(int(v)))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<TimeDoc, E> {
                Err(E::custom(format!("negative timestamp {v}")))
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<TimeDoc, E> {
                Err(E::custom(format!("floating-point timestamp {v} is not accepted; write it as a string")))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<TimeDoc, E> {
                parse_time(v).map(TimeDoc).map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KindDoc {
    Guarded,
    Timeout,
    General,
}

impl From<MachineKind> for KindDoc {
    fn from(k: MachineKind) -> Self {
        match k {
            MachineKind::Guarded => KindDoc::Guarded,
            MachineKind::Timeout => KindDoc::Timeout,
            MachineKind::General => KindDoc::General,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GuardDoc {
    pub lower: u64,
    pub lower_closed: bool,
    pub upper: BoundDoc,
    pub upper_closed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionDoc {
    pub source: String,
    pub input: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub guard: Option<GuardDoc>,
    pub output: String,
    pub target: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeoutDoc {
    /// Optional when the duration is infinite.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    pub duration: BoundDoc,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachineDocument {
    pub kind: KindDoc,
    pub states: Vec<String>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub initial: String,
    pub transitions: Vec<TransitionDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timeouts: Option<BTreeMap<String, TimeoutDoc>>,
}

fn guard_doc(g: &Guard) -> GuardDoc {
    GuardDoc {
        lower: g.lower(),
        lower_closed: g.lower_closed(),
        upper: BoundDoc(g.upper()),
        upper_closed: g.upper_closed(),
    }
}

fn guarded_doc(t: &GuardedTransition) -> TransitionDoc {
    TransitionDoc {
        source: t.source.clone(),
        input: t.input.clone(),
        guard: Some(guard_doc(&t.guard)),
        output: t.output.clone(),
        target: t.target.clone(),
    }
}

fn timeouts_doc(timeouts: &TimeoutMap) -> BTreeMap<String, TimeoutDoc> {
    timeouts
        .iter()
        .map(|(s, t)| (s.clone(), TimeoutDoc { target: Some(t.target.clone()), duration: BoundDoc(t.duration) }))
        .collect()
}

fn transition_key(t: &TransitionDoc) -> impl Ord + '_ {
    let guard = t.guard.as_ref().map(|g| (g.lower, !g.lower_closed, g.upper, g.upper_closed));
    (&t.source, &t.input, guard, &t.output, &t.target)
}

impl MachineDocument {
    pub fn from_machine(machine: &Machine) -> Self {
        let sig = machine.signature();
        let (mut transitions, timeouts) = match machine {
            Machine::Guarded(m) => (m.transitions.iter().map(guarded_doc).collect::<Vec<_>>(), None),
            Machine::Timeout(m) => (
                m.transitions
                    .iter()
                    .map(|t| TransitionDoc {
                        source: t.source.clone(),
                        input: t.input.clone(),
                        guard: None,
                        output: t.output.clone(),
                        target: t.target.clone(),
                    })
                    .collect(),
                Some(timeouts_doc(&m.timeouts)),
            ),
            Machine::General(m) => (m.transitions.iter().map(guarded_doc).collect(), Some(timeouts_doc(&m.timeouts))),
        };
        transitions.sort_by(|a, b| transition_key(a).cmp(&transition_key(b)));
        MachineDocument {
            kind: machine.kind().into(),
            states: sig.states.clone(),
            inputs: sig.inputs.clone(),
            outputs: sig.outputs.clone(),
            initial: sig.initial.clone(),
            transitions,
            timeouts,
        }
    }

    /// Builds the machine without checking completeness or determinism.
    pub fn to_machine(&self) -> Result<Machine, FormatError> {
        let sig = Signature {
            states: self.states.clone(),
            inputs: self.inputs.clone(),
            outputs: self.outputs.clone(),
            initial: self.initial.clone(),
        };
        let guards = |want: bool| -> Result<Vec<Option<Guard>>, FormatError> {
            self.transitions
                .iter()
                .enumerate()
                .map(|(k, t)| match (&t.guard, want) {
                    (Some(g), true) => Guard::new(g.lower, g.lower_closed, g.upper.0, g.upper_closed)
                        .map(Some)
                        .map_err(|e: ModelError| FormatError::structure(format!("transitions[{k}].guard"), e)),
                    (None, true) => Err(FormatError::structure(format!("transitions[{k}]"), "missing guard")),
                    (Some(_), false) => Err(FormatError::structure(
                        format!("transitions[{k}].guard"),
                        "timeout machines have no guards",
                    )),
                    (None, false) => Ok(None),
                })
                .collect()
        };
        let timeouts = || -> Result<TimeoutMap, FormatError> {
            let docs = self
                .timeouts
                .as_ref()
                .ok_or_else(|| FormatError::structure("timeouts", "required for this kind of machine"))?;
            docs.iter()
                .map(|(s, t)| {
                    let target = match (&t.target, t.duration.0) {
                        (Some(target), _) => target.clone(),
                        (None, Bound::Infinite) => s.clone(),
                        (None, Bound::Finite(_)) => {
                            return Err(FormatError::structure(format!("timeouts.{s}"), "missing target"))
                        }
                    };
                    Ok((s.clone(), Timeout { target, duration: t.duration.0 }))
                })
                .collect()
        };
        let guarded = |gs: Vec<Option<Guard>>| -> Vec<GuardedTransition> {
            self.transitions
                .iter()
                .zip(gs)
                .map(|(t, g)| {
                    GuardedTransition::new(&t.source, &t.input, g.expect("guard present"), &t.output, &t.target)
                })
                .collect()
        };
        Ok(match self.kind {
            KindDoc::Guarded => {
                if self.timeouts.is_some() {
                    return Err(FormatError::structure("timeouts", "guarded machines have no timeouts"));
                }
                Machine::Guarded(GuardedMachine::new(sig, guarded(guards(true)?)))
            }
            KindDoc::Timeout => {
                guards(false)?;
                let transitions = self
                    .transitions
                    .iter()
                    .map(|t| IoTransition::new(&t.source, &t.input, &t.output, &t.target))
                    .collect();
                Machine::Timeout(TimeoutMachine::new(sig, transitions, timeouts()?))
            }
            KindDoc::General => {
                let transitions = guarded(guards(true)?);
                Machine::General(GeneralMachine::new(sig, transitions, timeouts()?))
            }
        })
    }
}

pub fn parse_document(text: &str) -> Result<MachineDocument, FormatError> {
    parse_json(text)
}

/// Parses a machine without validating it.
pub fn parse_machine_unchecked(text: &str) -> Result<Machine, FormatError> {
    parse_document(text)?.to_machine()
}

/// Parses and validates a machine.
pub fn parse_machine(text: &str) -> Result<Machine, FormatError> {
    let machine = parse_machine_unchecked(text)?;
    let report = machine.validate();
    if !report.is_ok() {
        return Err(FormatError::Invalid(report));
    }
    Ok(machine)
}

pub fn serialize_machine(machine: &Machine) -> String {
    to_canonical_string(&MachineDocument::from_machine(machine))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WordEntryDoc {
    pub symbol: String,
    pub timestamp: TimeDoc,
}

pub fn word_document(word: &TimedWord) -> Vec<WordEntryDoc> {
    word.entries().iter().map(|(a, t)| WordEntryDoc { symbol: a.clone(), timestamp: TimeDoc(t.clone()) }).collect()
}

pub fn parse_word(text: &str) -> Result<TimedWord, FormatError> {
    let docs: Vec<WordEntryDoc> = parse_json(text)?;
    TimedWord::new(docs.into_iter().map(|d| (d.symbol, d.timestamp.0)).collect())
        .map_err(|e| FormatError::structure("timestamps", e))
}

pub fn serialize_word(word: &TimedWord) -> String {
    to_canonical_string(&word_document(word))
}

fn word_json(word: &TimedWord) -> Value {
    serde_json::to_value(word_document(word)).expect("words serialize")
}

fn symbols_json<T: fmt::Display>(word: &[T]) -> Value {
    Value::Array(word.iter().map(|a| Value::String(a.to_string())).collect())
}

/// The abstraction document: states carry their source state and clock
/// tag; transitions refer to states by display name.
pub fn fsm_json(fsm: &UntimedFsm) -> Value {
    let (family, bound) = match fsm.kind() {
        AbstractionKind::Regions { bound } => ("regions", Some(bound)),
        AbstractionKind::One => ("one", None),
        AbstractionKind::Tick { bound } => ("tick", Some(bound)),
    };
    let name = |k: usize| fsm.states()[k].to_string();
    let states: Vec<Value> = fsm
        .states()
        .iter()
        .map(|s| {
            let clock = match &s.clock {
                ClockTag::Untimed => Value::Null,
                ClockTag::Index(n) => json!(n),
                ClockTag::Region(r) => json!(r.to_string()),
            };
            json!({ "name": s.to_string(), "source": s.source, "clock": clock })
        })
        .collect();
    let transitions: Vec<Value> = fsm
        .transitions()
        .map(|(s, a, e)| {
            json!({
                "source": name(s),
                "symbol": fsm.alphabet()[a].to_string(),
                "output": e.output.to_string(),
                "target": name(e.target),
            })
        })
        .collect();
    let mut doc = json!({
        "family": family,
        "alphabet": symbols_json(fsm.alphabet()),
        "states": states,
        "initial": name(fsm.initial()),
        "transitions": transitions,
    });
    if let Some(b) = bound {
        doc["bound"] = json!(b);
    }
    doc
}

pub fn serialize_fsm(fsm: &UntimedFsm) -> String {
    to_canonical_string(&fsm_json(fsm))
}

fn violation_kind(v: &Violation) -> &'static str {
    use Violation::*;
    match v {
        EmptyComponent { .. } => "empty_component",
        NameClash { .. } => "name_clash",
        DuplicateName { .. } => "duplicate_name",
        UnknownInitial { .. } => "unknown_initial",
        UnknownState { .. } => "unknown_state",
        UnknownInput { .. } => "unknown_input",
        UnknownOutput { .. } => "unknown_output",
        Gap { .. } => "gap",
        Overlap { .. } => "overlap",
        MissingTransition { .. } => "missing_transition",
        DuplicateTransition { .. } => "duplicate_transition",
        MissingTimeout { .. } => "missing_timeout",
        NonPositiveTimeout { .. } => "non_positive_timeout",
        GuardExceedsTimeout { .. } => "guard_exceeds_timeout",
    }
}

pub fn validation_json(report: &ValidationReport) -> Value {
    let violations: Vec<Value> = report
        .violations
        .iter()
        .map(|v| {
            let mut doc = json!({ "kind": violation_kind(v), "message": v.to_string() });
            if let Violation::Gap { state, input, witness } | Violation::Overlap { state, input, witness } = v {
                doc["state"] = json!(state);
                doc["input"] = json!(input);
                doc["witness"] = json!(format_time(witness));
            }
            doc
        })
        .collect();
    json!({ "ok": report.is_ok(), "violations": violations })
}

fn timed_state_json(ts: &TimedState) -> Value {
    json!({ "state": ts.state, "clock": format_time(&ts.clock) })
}

pub fn run_json(run: &Run, with_trace: bool) -> Value {
    let mut doc = json!({ "outputs": word_json(&run.outputs), "final_state": timed_state_json(&run.final_state) });
    if with_trace {
        let steps: Vec<Value> = run
            .trace
            .steps
            .iter()
            .map(|s| match s {
                TraceStep::Delay { from, delay, to } => json!({
                    "step": "delay", "from": timed_state_json(from), "delay": format_time(delay), "to": timed_state_json(to),
                }),
                TraceStep::Io { from, input, output, to } => json!({
                    "step": "io", "from": timed_state_json(from), "input": input, "output": output, "to": timed_state_json(to),
                }),
            })
            .collect();
        doc["trace"] = Value::Array(steps);
    }
    doc
}

pub fn verdict_json(verdict: &Verdict) -> Value {
    match verdict {
        Verdict::Equivalent => json!({ "equivalent": true }),
        Verdict::Inequivalent(c) => json!({
            "equivalent": false,
            "counterexample": {
                "abstract_word": symbols_json(&c.abstract_word),
                "abstract_outputs_a": symbols_json(&c.abstract_outputs_a),
                "abstract_outputs_b": symbols_json(&c.abstract_outputs_b),
                "word": word_json(&c.word),
                "outputs_a": word_json(&c.outputs_a),
                "outputs_b": word_json(&c.outputs_b),
                "divergence": c.divergence,
            }
        }),
    }
}

pub fn bisimulation_json(violation: Option<&BisimulationViolation>) -> Value {
    match violation {
        None => json!({ "bisimulation": true }),
        Some(v) => json!({
            "bisimulation": false,
            "condition": v.condition,
            "state": v.pair.state,
            "clock": v.pair.clock.to_string(),
            "abstract_state": v.abstract_name,
            "symbol": v.symbol.to_string(),
            "reason": v.reason,
        }),
    }
}

pub fn to_pretty(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("values serialize");
    text.push('\n');
    text
}
