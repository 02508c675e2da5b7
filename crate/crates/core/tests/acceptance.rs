//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit when
//! any criterion fails.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

use rand::Rng;
use serde_json::{json, Value};
use tempfile::TempDir;
use tfsm_core::format::{parse_machine, parse_word, serialize_machine, serialize_word, verdict_json};
use tfsm_core::sample::{self, Limits, SampleRng};
use tfsm_core::time::{floor_u64, int, ratio, Rational};
use tfsm_core::transform::{is_lcro, lcro_guarded_to_timeout, loopfree_timeout_to_guarded};
use tfsm_core::validate::{validate_guarded, validate_timeout};
use tfsm_core::{
    abstract_general, abstract_guarded, abstract_machine, abstract_timeout, abstract_word_one, abstract_word_regions,
    abstract_word_tick, canonical_relation, check_region_bisimulation, cli, cross_equivalent, fixtures,
    general_equivalent, guarded_equivalent, run, timeout_equivalent, untime, AbstractState, AbstractSymbol,
    Counterexample, IoTransition, Machine, Region, Signature, TimedWord, Timeout, TimeoutMachine, UntimedFsm, Verdict,
};

type Outcome = Result<String, String>;
type Criterion = fn() -> Outcome;
type ScenarioGroup = fn(&Scratch) -> Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn word(entries: &[(&str, Rational)]) -> TimedWord {
    TimedWord::new(entries.iter().map(|(s, t)| (s.to_string(), t.clone())).collect()).expect("monotone word")
}

// ---------------------------------------------------------------------------
// 1. Figure-exact abstractions

type Arc = (String, String, String, String);

fn arcs(fsm: &UntimedFsm) -> Vec<Arc> {
    let mut v: Vec<Arc> = fsm
        .transitions()
        .map(|(s, a, e)| {
            (
                fsm.states()[s].to_string(),
                fsm.alphabet()[a].to_string(),
                e.output.to_string(),
                fsm.states()[e.target].to_string(),
            )
        })
        .collect();
    v.sort();
    v
}

fn expect_arcs(list: &[(&str, &str, &str, &str)]) -> Vec<Arc> {
    let mut v: Vec<Arc> =
        list.iter().map(|(s, a, o, t)| (s.to_string(), a.to_string(), o.to_string(), t.to_string())).collect();
    v.sort();
    v
}

fn sorted_states(fsm: &UntimedFsm) -> Vec<AbstractState> {
    let mut v = fsm.states().to_vec();
    v.sort_by_key(|s| s.to_string());
    v
}

fn figure_abstractions() -> Outcome {
    let fig1b = abstract_guarded(&fixtures::fig1a(), 1).map_err(|e| e.to_string())?;
    let states = [AbstractState::untimed("s0"), AbstractState::untimed("s1")];
    ensure(fig1b.states() == states, || format!("fig 1b states {:?}", fig1b.states()))?;
    let expected = expect_arcs(&[
        ("s0", "(i,[0,0])", "o1", "s0"),
        ("s0", "(i,(0,1))", "o1", "s0"),
        ("s0", "(i,[1,1])", "o1", "s0"),
        ("s0", "(i,(1,inf))", "o2", "s1"),
        ("s1", "(i,[0,0])", "o2", "s1"),
        ("s1", "(i,(0,1))", "o2", "s1"),
        ("s1", "(i,[1,1])", "o1", "s0"),
        ("s1", "(i,(1,inf))", "o1", "s0"),
    ]);
    ensure(arcs(&fig1b) == expected, || format!("fig 1b arcs {:?}", arcs(&fig1b)))?;

    let fig2b = abstract_timeout(&fixtures::fig2a());
    let expected_states = [
        AbstractState::indexed("q0", 0),
        AbstractState::indexed("q0", 1),
        AbstractState::indexed("q0", 2),
        AbstractState::indexed("q1", 0),
        AbstractState::indexed("q1", 1),
    ];
    ensure(sorted_states(&fig2b) == expected_states, || format!("fig 2b states {:?}", fig2b.states()))?;
    let expected = expect_arcs(&[
        ("(q0,0)", "𝟙", "𝟙", "(q0,1)"),
        ("(q0,1)", "𝟙", "𝟙", "(q0,2)"),
        ("(q0,2)", "𝟙", "𝟙", "(q1,0)"),
        ("(q1,0)", "𝟙", "𝟙", "(q1,1)"),
        ("(q1,1)", "𝟙", "𝟙", "(q0,0)"),
        ("(q0,0)", "i", "o1", "(q0,0)"),
        ("(q0,1)", "i", "o1", "(q0,0)"),
        ("(q0,2)", "i", "o1", "(q0,0)"),
        ("(q1,0)", "i", "o2", "(q1,0)"),
        ("(q1,1)", "i", "o2", "(q1,0)"),
    ]);
    ensure(arcs(&fig2b) == expected, || format!("fig 2b arcs {:?}", arcs(&fig2b)))?;

    let fig3b = abstract_general(&fixtures::fig3a());
    let mut expected_states = vec![
        AbstractState::region("s0", Region::Point(0)),
        AbstractState::region("s0", Region::Open(0)),
        AbstractState::region("s1", Region::Point(0)),
        AbstractState::region("s1", Region::Open(0)),
        AbstractState::region("s1", Region::Point(1)),
        AbstractState::region("s1", Region::Tail(1)),
    ];
    expected_states.sort_by_key(|s| s.to_string());
    ensure(sorted_states(&fig3b) == expected_states, || format!("fig 3b states {:?}", fig3b.states()))?;
    let expected = expect_arcs(&[
        ("(s0,[0,0])", "𝕥", "𝕥", "(s0,(0,1))"),
        ("(s0,(0,1))", "𝕥", "𝕥", "(s1,[0,0])"),
        ("(s1,[0,0])", "𝕥", "𝕥", "(s1,(0,1))"),
        ("(s1,(0,1))", "𝕥", "𝕥", "(s1,[1,1])"),
        ("(s1,[1,1])", "𝕥", "𝕥", "(s1,(1,inf))"),
        ("(s1,(1,inf))", "𝕥", "𝕥", "(s1,(1,inf))"),
        ("(s0,[0,0])", "i", "o1", "(s0,[0,0])"),
        ("(s0,(0,1))", "i", "o1", "(s0,[0,0])"),
        ("(s1,[0,0])", "i", "o2", "(s1,[0,0])"),
        ("(s1,(0,1))", "i", "o2", "(s1,[0,0])"),
        ("(s1,[1,1])", "i", "o2", "(s1,[0,0])"),
        ("(s1,(1,inf))", "i", "o1", "(s0,[0,0])"),
    ]);
    ensure(arcs(&fig3b) == expected, || format!("fig 3b arcs {:?}", arcs(&fig3b)))?;
    Ok(format!(
        "states/transitions {}/{}, {}/{}, {}/{} match arc for arc",
        fig1b.states().len(),
        fig1b.transition_count(),
        fig2b.states().len(),
        fig2b.transition_count(),
        fig3b.states().len(),
        fig3b.transition_count()
    ))
}

// ---------------------------------------------------------------------------
// 2. Commuting identities of the word abstractions

fn plain(word: &[String]) -> Vec<AbstractSymbol> {
    word.iter().map(|s| AbstractSymbol::plain(s)).collect()
}

fn commuting_identities() -> Outcome {
    const CASES: usize = 500;
    let limits = Limits::default();
    let mut rng = sample::rng(0x1e44a);
    let mut passed = [0usize; 3];
    for _ in 0..CASES {
        let m = sample::guarded(&mut rng, &limits);
        let v = sample::timed_word(&mut rng, &m.sig.inputs, &limits);
        let n = m.max_constant();
        let fsm = abstract_guarded(&m, n).map_err(|e| e.to_string())?;
        let timed = untime(&run(&m, &v).map_err(|e| e.to_string())?.outputs);
        let abs = fsm.run(&abstract_word_regions(&v, n)).map(|(_, o)| o);
        passed[0] += usize::from(abs == Some(plain(&timed)));

        let m = sample::timeout(&mut rng, &limits);
        let v = sample::timed_word(&mut rng, &m.sig.inputs, &limits);
        let fsm = abstract_timeout(&m);
        let timed = abstract_word_one(&run(&m, &v).map_err(|e| e.to_string())?.outputs);
        let abs = fsm.run(&abstract_word_one(&v)).map(|(_, o)| o);
        passed[1] += usize::from(abs == Some(timed));

        let m = sample::general(&mut rng, &limits);
        let v = sample::timed_word(&mut rng, &m.sig.inputs, &limits);
        let fsm = abstract_general(&m);
        let timed = abstract_word_tick(&run(&m, &v).map_err(|e| e.to_string())?.outputs);
        let abs = fsm.run(&abstract_word_tick(&v)).map(|(_, o)| o);
        passed[2] += usize::from(abs == Some(timed));
    }
    let line = format!("guarded {}/{CASES}, timeout {}/{CASES}, general {}/{CASES}", passed[0], passed[1], passed[2]);
    ensure(passed.iter().all(|&p| p == CASES), || line.clone())?;
    Ok(line)
}

// ---------------------------------------------------------------------------
// 3. Soundness of the equivalence verdicts

/// Runs `word` on the machine through the `simulate` subcommand.
fn simulate_via_cli(dir: &Path, machine: &Machine, word: &TimedWord) -> Result<TimedWord, String> {
    let mpath = dir.join("machine.json");
    let wpath = dir.join("word.json");
    std::fs::write(&mpath, serialize_machine(machine)).map_err(|e| e.to_string())?;
    std::fs::write(&wpath, serialize_word(word)).map_err(|e| e.to_string())?;
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let args = ["tfsm".as_ref(), "--json".as_ref(), "simulate".as_ref(), mpath.as_os_str(), wpath.as_os_str()];
    let code = cli::main_with(args, &mut out, &mut err);
    ensure(code == 0, || format!("simulate exited {code}: {}", String::from_utf8_lossy(&err)))?;
    let doc: Value = serde_json::from_slice(&out).map_err(|e| e.to_string())?;
    parse_word(&doc["outputs"].to_string()).map_err(|e| e.to_string())
}

fn check_counterexample(dir: &Path, c: &Counterexample, a: &Machine, b: &Machine) -> Result<(), String> {
    let ra = simulate_via_cli(dir, a, &c.word)?;
    let rb = simulate_via_cli(dir, b, &c.word)?;
    let (oa, ob) = (untime(&ra), untime(&rb));
    let k = c.divergence;
    ensure(k < oa.len() && oa[k] != ob[k] && oa[..k] == ob[..k], || {
        format!("counterexample {} does not diverge at {k}: {oa:?} vs {ob:?}", c.word)
    })?;
    ensure(ra == c.outputs_a && rb == c.outputs_b, || "reported outputs differ from the replay".into())
}

struct Tally {
    equivalent: usize,
    inequivalent: usize,
}

/// Draws machines until one shares the inputs and outputs of `sig`.
fn compatible<M: Into<Machine>>(
    rng: &mut SampleRng,
    sig: &Signature,
    mut generate: impl FnMut(&mut SampleRng) -> M,
) -> Machine {
    loop {
        let m: Machine = generate(rng).into();
        let s = m.signature();
        if s.inputs == sig.inputs && s.outputs == sig.outputs {
            return m;
        }
    }
}

type Decide = dyn Fn(&Machine, &Machine) -> Result<Verdict, String>;
type AbstractBack = dyn Fn(&TimedWord, &Machine, &Machine) -> Vec<AbstractSymbol>;

fn soundness_variant(
    name: &str,
    rng: &mut SampleRng,
    pair: &mut dyn FnMut(&mut SampleRng) -> (Machine, Machine),
    decide: &Decide,
    abstract_back: &AbstractBack,
) -> Result<Tally, String> {
    const PAIRS: usize = 200;
    const WORDS: usize = 200;
    let limits = Limits::default();
    let dir = TempDir::new().map_err(|e| e.to_string())?;
    let mut tally = Tally { equivalent: 0, inequivalent: 0 };
    for k in 0..PAIRS {
        let (a, b) = pair(rng);
        let verdict = decide(&a, &b)?;
        let reverse = decide(&b, &a)?;
        ensure(verdict.is_equivalent() == reverse.is_equivalent(), || format!("{name} pair {k}: asymmetric verdict"))?;
        match &verdict {
            Verdict::Equivalent => {
                tally.equivalent += 1;
                for _ in 0..WORDS {
                    let w = sample::timed_word(rng, &a.signature().inputs, &limits);
                    let oa = run(&a, &w).map_err(|e| e.to_string())?.outputs;
                    let ob = run(&b, &w).map_err(|e| e.to_string())?.outputs;
                    ensure(oa == ob, || format!("{name} pair {k}: false equivalence, {w} gives {oa} vs {ob}"))?;
                }
            }
            Verdict::Inequivalent(c) => {
                tally.inequivalent += 1;
                check_counterexample(dir.path(), c, &a, &b).map_err(|e| format!("{name} pair {k}: {e}"))?;
                ensure(abstract_back(&c.word, &a, &b) == c.abstract_word, || {
                    format!("{name} pair {k}: lifted word does not abstract back")
                })?;
            }
        }
    }
    Ok(tally)
}

fn soundness() -> Outcome {
    let limits = Limits::default();
    let mut rng = sample::rng(0x7e0);
    let mut report = Vec::new();

    let mut guarded_pair = |rng: &mut SampleRng| -> (Machine, Machine) {
        let a = sample::guarded(rng, &limits);
        let b: Machine = match rng.random_range(0..3) {
            0 => sample::equivalent_guarded(rng, &a).into(),
            1 => {
                let b = sample::equivalent_guarded(rng, &a);
                sample::mutate_output(rng, &b.into())
            }
            _ => compatible(rng, &a.sig, |r| sample::guarded(r, &limits)),
        };
        (a.into(), b)
    };
    let t = soundness_variant(
        "guarded",
        &mut rng,
        &mut guarded_pair,
        &|a, b| match (a, b) {
            (Machine::Guarded(a), Machine::Guarded(b)) => guarded_equivalent(a, b).map_err(|e| e.to_string()),
            _ => Err("unexpected kinds".into()),
        },
        &|w, a, b| abstract_word_regions(w, a.max_constant().max(b.max_constant())),
    )?;
    report.push(format!("guarded {}/{}", t.equivalent, t.inequivalent));

    let mut timeout_pair = |rng: &mut SampleRng| -> (Machine, Machine) {
        let a = sample::timeout(rng, &limits);
        let b: Machine = match rng.random_range(0..3) {
            0 => sample::equivalent_timeout(rng, &a).into(),
            1 => {
                let b = sample::equivalent_timeout(rng, &a);
                sample::mutate_output(rng, &b.into())
            }
            _ => compatible(rng, &a.sig, |r| sample::timeout(r, &limits)),
        };
        (a.into(), b)
    };
    let t = soundness_variant(
        "timeout",
        &mut rng,
        &mut timeout_pair,
        &|a, b| match (a, b) {
            (Machine::Timeout(a), Machine::Timeout(b)) => timeout_equivalent(a, b).map_err(|e| e.to_string()),
            _ => Err("unexpected kinds".into()),
        },
        &|w, _, _| abstract_word_one(w),
    )?;
    report.push(format!("timeout {}/{}", t.equivalent, t.inequivalent));

    let mut general_pair = |rng: &mut SampleRng| -> (Machine, Machine) {
        let a = sample::general(rng, &limits);
        let b: Machine = match rng.random_range(0..3) {
            0 => sample::equivalent_general(rng, &a).into(),
            1 => {
                let b = sample::equivalent_general(rng, &a);
                sample::mutate_output(rng, &b.into())
            }
            _ => compatible(rng, &a.sig, |r| sample::general(r, &limits)),
        };
        (a.into(), b)
    };
    let t = soundness_variant(
        "general",
        &mut rng,
        &mut general_pair,
        &|a, b| match (a, b) {
            (Machine::General(a), Machine::General(b)) => general_equivalent(a, b).map_err(|e| e.to_string()),
            _ => Err("unexpected kinds".into()),
        },
        &|w, _, _| abstract_word_tick(w),
    )?;
    report.push(format!("general {}/{}", t.equivalent, t.inequivalent));
    Ok(format!("200 pairs x 200 words per variant, no false verdicts (equivalent/inequivalent: {})", report.join(", ")))
}

// ---------------------------------------------------------------------------
// 4. The two inexpressible machines

fn single_output(m: &Machine, t: &Rational) -> Result<String, String> {
    let r = run(m, &word(&[("i", t.clone())])).map_err(|e| e.to_string())?;
    Ok(untime(&r.outputs).remove(0))
}

fn inexpressible_pair() -> Outcome {
    let m1: Machine = fixtures::m1().into();
    let m2: Machine = fixtures::m2().into();
    for k in 0..=40 {
        let t = ratio(k, 4);
        let even = floor_u64(&t).is_multiple_of(2);
        let o = single_output(&m1, &t)?;
        ensure((o == "o1") == even, || format!("M1 at {t} gives {o}"))?;
        let o = single_output(&m2, &t)?;
        ensure((o == "o1") == (t <= int(2)), || format!("M2 at {t} gives {o}"))?;
    }
    let at = ratio(5, 2);
    let (o1, o2) = (single_output(&m1, &at)?, single_output(&m2, &at)?);
    ensure(o1 == "o1" && o2 == "o2", || format!("at 5/2: {o1} vs {o2}"))?;

    let verdict = cross_equivalent(&m1, &m2).map_err(|e| e.to_string())?;
    let c = verdict.counterexample().ok_or("M1 and M2 reported equivalent")?;
    let ra = run(&m1, &c.word).map_err(|e| e.to_string())?;
    let rb = run(&m2, &c.word).map_err(|e| e.to_string())?;
    let k = c.divergence;
    let (oa, ob) = (untime(&ra.outputs), untime(&rb.outputs));
    ensure(k < oa.len() && oa[k] != ob[k] && oa[..k] == ob[..k], || {
        format!("counterexample {} does not diverge", c.word)
    })?;
    Ok(format!("41 grid points each; counterexample {} gives {} vs {}", c.word, ra.outputs, rb.outputs))
}

// ---------------------------------------------------------------------------
// 5. Conversions round trip

fn conversion_round_trip() -> Outcome {
    const CASES: usize = 100;
    let limits = Limits::default();
    let mut rng = sample::rng(0xa16);
    let mut passed = 0;
    for k in 0..CASES {
        let m = sample::loop_free_timeout(&mut rng, &limits);
        let g = loopfree_timeout_to_guarded(&m).map_err(|e| format!("case {k}: {e}"))?;
        ensure(validate_guarded(&g).is_ok() && is_lcro(&g), || {
            format!("case {k}: output is not a valid LCRO machine")
        })?;
        let source: Machine = m.into();
        let forward = cross_equivalent(&source, &g.clone().into()).map_err(|e| e.to_string())?;
        ensure(forward.is_equivalent(), || format!("case {k}: conversion changed behavior: {forward}"))?;
        let back = lcro_guarded_to_timeout(&g).map_err(|e| format!("case {k}: {e}"))?;
        ensure(validate_timeout(&back).is_ok(), || format!("case {k}: reconverted machine is invalid"))?;
        let round = cross_equivalent(&source, &back.into()).map_err(|e| e.to_string())?;
        ensure(round.is_equivalent(), || format!("case {k}: round trip changed behavior: {round}"))?;
        passed += 1;
    }
    Ok(format!("{passed}/{CASES} loop-free machines"))
}

// ---------------------------------------------------------------------------
// 6. Bisimulation verification

fn mutate_abstract_output(rng: &mut SampleRng, m: &Machine, fsm: &mut UntimedFsm) {
    let edges: Vec<(usize, usize, AbstractSymbol)> =
        fsm.transitions().map(|(s, a, e)| (s, a, e.output.clone())).collect();
    let (s, a, old) = &edges[rng.random_range(0..edges.len())];
    let choices: Vec<&String> = m.signature().outputs.iter().filter(|o| *old != AbstractSymbol::plain(o)).collect();
    let new = AbstractSymbol::plain(choices[rng.random_range(0..choices.len())]);
    fsm.set_output(*s, *a, new);
}

fn bisimulation() -> Outcome {
    const CASES: usize = 100;
    let limits = Limits::default();
    let mut rng = sample::rng(0xb151);
    let mut accepted = [0usize; 3];
    let mut rejected = [0usize; 3];
    let mut conditions = [0usize; 5];
    for _ in 0..CASES {
        let machines: [Machine; 3] = [
            sample::guarded(&mut rng, &limits).into(),
            sample::timeout(&mut rng, &limits).into(),
            sample::general(&mut rng, &limits).into(),
        ];
        for (v, m) in machines.iter().enumerate() {
            let mut fsm = abstract_machine(m, None).map_err(|e| e.to_string())?;
            let rel = canonical_relation(m, &fsm);
            match check_region_bisimulation(m, &fsm, &rel).map_err(|e| e.to_string())? {
                None => accepted[v] += 1,
                Some(w) => return Err(format!("canonical relation rejected: {w}")),
            }
            mutate_abstract_output(&mut rng, m, &mut fsm);
            if let Some(w) = check_region_bisimulation(m, &fsm, &rel).map_err(|e| e.to_string())? {
                ensure((1..=4).contains(&w.condition), || format!("bad condition number {}", w.condition))?;
                conditions[w.condition as usize] += 1;
                rejected[v] += 1;
            }
        }
    }
    let line = format!(
        "canonical relations accepted {}/{}/{} of {CASES}, mutants rejected {}/{}/{} of {CASES} (witness conditions 1-4: {:?})",
        accepted[0],
        accepted[1],
        accepted[2],
        rejected[0],
        rejected[1],
        rejected[2],
        &conditions[1..]
    );
    ensure(accepted.iter().chain(&rejected).all(|&n| n == CASES), || line.clone())?;
    Ok(line)
}

// ---------------------------------------------------------------------------
// 7. Command-line contract

const FIXTURES: [&str; 5] = ["fig1a.json", "fig2a.json", "fig3a.json", "m1.json", "m2.json"];

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn tfsm(args: &[&str]) -> Result<Output, String> {
    Command::new(env!("CARGO_BIN_EXE_tfsm")).args(args).output().map_err(|e| e.to_string())
}

fn expect_code(out: &Output, code: i32, what: &str) -> Result<(), String> {
    ensure(out.status.code() == Some(code), || {
        format!(
            "{what}: exit {:?}, expected {code}; stderr: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn json_of(out: &Output) -> Result<Value, String> {
    serde_json::from_slice(&out.stdout).map_err(|e| format!("stdout is not JSON: {e}"))
}

fn chain() -> TimeoutMachine {
    TimeoutMachine::new(
        Signature::new(["a", "b", "c"], ["i"], ["o1", "o2", "o3"], "a"),
        vec![
            IoTransition::new("a", "i", "o1", "b"),
            IoTransition::new("b", "i", "o2", "a"),
            IoTransition::new("c", "i", "o3", "c"),
        ],
        BTreeMap::from([
            ("a".to_string(), Timeout::after(1, "b")),
            ("b".to_string(), Timeout::after(2, "c")),
            ("c".to_string(), Timeout::never("c")),
        ]),
    )
}

struct Scratch(TempDir);

impl Scratch {
    fn write(&self, name: &str, text: &str) -> Result<String, String> {
        let p = self.0.path().join(name);
        std::fs::write(&p, text).map_err(|e| e.to_string())?;
        Ok(p.to_string_lossy().into_owned())
    }
}

fn path(name: &str) -> String {
    fixture(name).to_string_lossy().into_owned()
}

fn read_json(name: &str) -> Result<Value, String> {
    let text = std::fs::read_to_string(fixture(name)).map_err(|e| e.to_string())?;
    serde_json::from_str(&text).map_err(|e| e.to_string())
}

fn validate_scenarios(dir: &Scratch) -> Result<(), String> {
    for f in FIXTURES {
        expect_code(&tfsm(&["validate", &path(f)])?, 0, &format!("validate {f}"))?;
    }
    let mut doc = read_json("fig1a.json")?;
    doc["transitions"].as_array_mut().ok_or("no transitions")?.remove(0);
    let broken = dir.write("incomplete.json", &doc.to_string())?;
    let out = tfsm(&["--json", "validate", &broken])?;
    expect_code(&out, 2, "validate incomplete machine")?;
    ensure(json_of(&out)?["ok"] == false, || "violations not reported".into())?;

    let mut doc = read_json("m1.json")?;
    doc["timeouts"]["q0"]["duration"] = json!("0");
    let zero = dir.write("zero.json", &doc.to_string())?;
    expect_code(&tfsm(&["validate", &zero])?, 2, "validate zero duration")?;
    doc["kind"] = json!("hybrid");
    let unknown = dir.write("unknown.json", &doc.to_string())?;
    let out = tfsm(&["--json", "validate", &unknown])?;
    expect_code(&out, 2, "validate unknown kind")?;
    ensure(json_of(&out)?["error"] == "parse", || "unknown kind is not a parse error".into())
}

fn simulate_and_abstract_scenarios(dir: &Scratch) -> Result<(), String> {
    let w = dir.write("word.json", &serialize_word(&word(&[("i", ratio(5, 2))])))?;
    let out = tfsm(&["--json", "simulate", &path("m1.json"), &w])?;
    expect_code(&out, 0, "simulate m1")?;
    ensure(json_of(&out)?["outputs"][0]["symbol"] == "o1", || "m1 at 5/2 is not o1".into())?;
    let out = tfsm(&["--json", "simulate", "--trace", &path("m2.json"), &w])?;
    expect_code(&out, 0, "simulate m2")?;
    let v = json_of(&out)?;
    ensure(v["outputs"][0]["symbol"] == "o2" && v["trace"].as_array().is_some_and(|t| t.len() == 2), || {
        "m2 at 5/2 is not o2 with a two-step trace".into()
    })?;

    let out = tfsm(&["--json", "abstract", &path("fig1a.json"), "--n", "1"])?;
    expect_code(&out, 0, "abstract fig1a")?;
    let v = json_of(&out)?;
    let (ns, nt) = (v["states"].as_array().map(Vec::len), v["transitions"].as_array().map(Vec::len));
    ensure(ns == Some(2) && nt == Some(8), || format!("abstract fig1a --n 1: {ns:?} states, {nt:?} transitions"))?;
    expect_code(&tfsm(&["abstract", &path("fig1a.json"), "--n", "0"])?, 2, "abstract below the max constant")?;
    for f in FIXTURES {
        expect_code(&tfsm(&["abstract", &path(f)])?, 0, &format!("abstract {f}"))?;
    }
    Ok(())
}

fn equiv_scenarios(dir: &Scratch) -> Result<(), String> {
    let out = tfsm(&["--json", "equiv", &path("m1.json"), &path("m2.json")])?;
    expect_code(&out, 1, "equiv m1 m2")?;
    let again = tfsm(&["--json", "equiv", &path("m1.json"), &path("m2.json")])?;
    ensure(out.stdout == again.stdout, || "equiv report is not byte-stable".into())?;
    let library = cross_equivalent(&fixtures::m1().into(), &fixtures::m2().into()).map_err(|e| e.to_string())?;
    let v = json_of(&out)?;
    ensure(v == verdict_json(&library), || "CLI and library counterexamples differ".into())?;
    let c = &v["counterexample"];
    let k = c["divergence"].as_u64().ok_or("no divergence index")? as usize;
    let replay = dir.write("cx.json", &c["word"].to_string())?;
    let sa = json_of(&tfsm(&["--json", "simulate", &path("m1.json"), &replay])?)?;
    let sb = json_of(&tfsm(&["--json", "simulate", &path("m2.json"), &replay])?)?;
    ensure(sa["outputs"][k]["symbol"] != sb["outputs"][k]["symbol"], || "replayed counterexample agrees".into())?;
    ensure(sa["outputs"] == c["outputs_a"] && sb["outputs"] == c["outputs_b"], || "replay differs from report".into())?;
    let text = tfsm(&["equiv", &path("m1.json"), &path("m2.json")])?;
    expect_code(&text, 1, "equiv m1 m2 without --json")?;

    for f in FIXTURES {
        expect_code(&tfsm(&["equiv", &path(f), &path(f)])?, 0, &format!("equiv {f} {f}"))?;
    }

    let mut doc = read_json("fig1a.json")?;
    for t in doc["transitions"].as_array_mut().ok_or("no transitions")? {
        t["input"] = json!("j");
    }
    doc["inputs"] = json!(["j"]);
    let other = dir.write("other_inputs.json", &doc.to_string())?;
    let out = tfsm(&["--json", "equiv", &path("fig1a.json"), &other])?;
    expect_code(&out, 2, "equiv with another alphabet")?;
    ensure(json_of(&out)?.get("error").is_some(), || "alphabet mismatch without an error report".into())
}

fn convert_scenarios(dir: &Scratch) -> Result<(), String> {
    let out = tfsm(&["--json", "convert", &path("m1.json"), "--to", "guarded"])?;
    expect_code(&out, 2, "convert m1 --to guarded")?;
    let v = json_of(&out)?;
    ensure(v["error"] == "not_loop_free" && v["cycle"] == json!(["q0", "q1"]), || format!("convert m1 report: {v}"))?;
    let out = tfsm(&["--json", "convert", &path("m2.json"), "--to", "timeout"])?;
    expect_code(&out, 2, "convert m2 --to timeout")?;
    ensure(json_of(&out)?["error"] == "not_lcro", || "m2 not reported as not LCRO".into())?;
    expect_code(&tfsm(&["convert", &path("fig3a.json"), "--to", "timeout"])?, 2, "convert a general machine")?;
    expect_code(&tfsm(&["convert", &path("fig2a.json"), "--to", "timeout"])?, 0, "convert to the same kind")?;

    let chain_path = dir.write("chain.json", &serialize_machine(&chain().into()))?;
    let out = tfsm(&["convert", &chain_path, "--to", "guarded"])?;
    expect_code(&out, 0, "convert a loop-free chain")?;
    let guarded = dir.write("chain_guarded.json", &String::from_utf8_lossy(&out.stdout))?;
    expect_code(&tfsm(&["validate", &guarded])?, 0, "validate the converted chain")?;
    expect_code(&tfsm(&["equiv", &chain_path, &guarded])?, 0, "equiv chain with its conversion")?;
    let out = tfsm(&["convert", &guarded, "--to", "timeout"])?;
    expect_code(&out, 0, "convert back to timeouts")?;
    let back = dir.write("chain_back.json", &String::from_utf8_lossy(&out.stdout))?;
    expect_code(&tfsm(&["equiv", &chain_path, &back])?, 0, "equiv chain with its round trip")?;

    for f in FIXTURES {
        let out = tfsm(&["embed", &path(f)])?;
        expect_code(&out, 0, &format!("embed {f}"))?;
        let text = String::from_utf8_lossy(&out.stdout).into_owned();
        let m = parse_machine(&text).map_err(|e| e.to_string())?;
        ensure(matches!(m, Machine::General(_)), || format!("embed {f} is not general"))?;
        let embedded = dir.write("embedded.json", &text)?;
        expect_code(&tfsm(&["equiv", &path(f), &embedded])?, 0, &format!("equiv {f} with its embedding"))?;
    }
    Ok(())
}

fn missing_file_scenarios(dir: &Scratch) -> Result<(), String> {
    let missing = dir.0.path().join("missing.json").to_string_lossy().into_owned();
    for sub in ["validate", "simulate", "abstract", "equiv", "convert", "embed"] {
        let mut args = vec!["--json", sub, &missing];
        match sub {
            "simulate" | "equiv" => args.push(&missing),
            "convert" => args.extend(["--to", "guarded"]),
            _ => {}
        }
        let out = tfsm(&args)?;
        expect_code(&out, 2, &format!("{sub} on a missing file"))?;
        ensure(json_of(&out)?.get("error").is_some(), || format!("{sub}: no JSON error report"))?;
    }
    Ok(())
}

fn canonical_round_trips() -> Result<(), String> {
    for f in FIXTURES {
        let text = std::fs::read_to_string(fixture(f)).map_err(|e| e.to_string())?;
        let m = parse_machine(&text).map_err(|e| format!("{f}: {e}"))?;
        let once = serialize_machine(&m);
        ensure(once == text, || format!("{f} is not in canonical form"))?;
        let twice = serialize_machine(&parse_machine(&once).map_err(|e| e.to_string())?);
        ensure(once == twice, || format!("{f}: serialization is not idempotent"))?;
    }
    Ok(())
}

fn cli_contract() -> Outcome {
    let dir = Scratch(TempDir::new().map_err(|e| e.to_string())?);
    let groups: [(&str, ScenarioGroup); 5] = [
        ("validate", validate_scenarios),
        ("simulate/abstract", simulate_and_abstract_scenarios),
        ("equiv", equiv_scenarios),
        ("convert/embed", convert_scenarios),
        ("missing files", missing_file_scenarios),
    ];
    for (name, group) in groups {
        group(&dir).map_err(|e| format!("{name}: {e}"))?;
    }
    canonical_round_trips()?;
    Ok(format!(
        "{} scenario groups pass, {}/{} fixtures round-trip canonically",
        groups.len(),
        FIXTURES.len(),
        FIXTURES.len()
    ))
}

// ---------------------------------------------------------------------------

fn main() {
    let criteria: [(&str, Criterion); 7] = [
        ("figure-exact abstractions", figure_abstractions),
        ("abstraction commuting identities", commuting_identities),
        ("equivalence soundness", soundness),
        ("inexpressible machines", inexpressible_pair),
        ("conversion round trip", conversion_round_trip),
        ("bisimulation verification", bisimulation),
        ("command-line contract", cli_contract),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail} ({secs:.2}s)", k + 1),
            Err(reason) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {reason} ({secs:.2}s)", k + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
