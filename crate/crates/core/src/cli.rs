//! The `tfsm` command-line tool.
//!
//! Exit codes: 0 on success or equivalence, 1 when two machines are not
//! equivalent, 2 on any failed precondition (unreadable or invalid input,
//! differing alphabets, inapplicable conversion).

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::abstraction::abstract_machine;
use crate::format::{
    fsm_json, parse_machine, parse_machine_unchecked, parse_word, run_json, serialize_fsm, serialize_machine,
    to_pretty, validation_json, verdict_json,
};
use crate::model::Machine;
use crate::semantics::run;
use crate::transform::{cross_equivalent, embed, lcro_guarded_to_timeout, loopfree_timeout_to_guarded, TransformError};

#[derive(Debug, Parser)]
#[command(name = "tfsm", version, about = "Timed FSMs with guards and timeouts")]
pub struct Cli {
    /// Print machine-readable JSON reports.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check completeness, determinism and well-formedness.
    Validate { machine: PathBuf },
    /// Run a timed input word.
    Simulate {
        machine: PathBuf,
        word: PathBuf,
        /// Also print every delay and input/output step.
        #[arg(long)]
        trace: bool,
    },
    /// Build the untimed abstraction matching the machine kind.
    Abstract {
        machine: PathBuf,
        /// Region bound; defaults to the largest constant of the machine.
        #[arg(long = "n", value_name = "N")]
        bound: Option<u64>,
    },
    /// Decide equivalence of two machines of any kinds.
    Equiv { a: PathBuf, b: PathBuf },
    /// Convert between timeout machines and guarded machines.
    Convert {
        machine: PathBuf,
        #[arg(long, value_enum)]
        to: Target,
    },
    /// Embed a machine into the model with guards and timeouts.
    Embed { machine: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Target {
    Guarded,
    Timeout,
}

/// A failed precondition: exit code 2.
struct Failure {
    category: &'static str,
    message: String,
    extra: Option<Value>,
}

impl Failure {
    fn new(category: &'static str, message: impl ToString) -> Self {
        Failure { category, message: message.to_string(), extra: None }
    }
}

struct Output {
    code: i32,
    text: String,
    json: Value,
}

impl Output {
    fn ok(text: String, json: Value) -> Self {
        Output { code: 0, text, json }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::new("io", format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<Machine, Failure> {
    parse_machine(&read(path)?).map_err(|e| Failure::new("parse", format!("{}: {e}", path.display())))
}

fn execute(command: &Command) -> Result<Output, Failure> {
    match command {
        Command::Validate { machine } => {
            let m = parse_machine_unchecked(&read(machine)?)
                .map_err(|e| Failure::new("parse", format!("{}: {e}", machine.display())))?;
            let report = m.validate();
            let code = if report.is_ok() { 0 } else { 2 };
            Ok(Output { code, text: format!("{report}\n"), json: validation_json(&report) })
        }
        Command::Simulate { machine, word, trace } => {
            let m = load(machine)?;
            let w = parse_word(&read(word)?).map_err(|e| Failure::new("parse", format!("{}: {e}", word.display())))?;
            if let Some(a) = w.symbols().find(|a| !m.signature().inputs.iter().any(|i| i == a)) {
                return Err(Failure::new("word", format!("`{a}` is not an input of the machine")));
            }
            let r = run(&m, &w).map_err(|e| Failure::new("semantics", e))?;
            let mut text = format!("outputs: {}\nfinal state: {}\n", r.outputs, r.final_state);
            if *trace {
                for step in &r.trace.steps {
                    text.push_str(&format!("  {step}\n"));
                }
            }
            Ok(Output::ok(text, run_json(&r, *trace)))
        }
        Command::Abstract { machine, bound } => {
            let m = load(machine)?;
            if bound.is_some() && matches!(m, Machine::Timeout(_)) {
                return Err(Failure::new("usage", "--n does not apply to timeout machines"));
            }
            let fsm = abstract_machine(&m, *bound).map_err(|e| Failure::new("abstraction", e))?;
            Ok(Output::ok(serialize_fsm(&fsm), fsm_json(&fsm)))
        }
        Command::Equiv { a, b } => {
            let (ma, mb) = (load(a)?, load(b)?);
            let verdict = cross_equivalent(&ma, &mb).map_err(|e| Failure::new("equivalence", e))?;
            let code = if verdict.is_equivalent() { 0 } else { 1 };
            Ok(Output { code, text: format!("{verdict}\n"), json: verdict_json(&verdict) })
        }
        Command::Convert { machine, to } => {
            let m = load(machine)?;
            let converted: Machine = match (to, &m) {
                (Target::Guarded, Machine::Guarded(_)) | (Target::Timeout, Machine::Timeout(_)) => m.clone(),
                (Target::Guarded, Machine::Timeout(t)) => {
                    loopfree_timeout_to_guarded(t).map_err(transform_failure)?.into()
                }
                (Target::Timeout, Machine::Guarded(g)) => lcro_guarded_to_timeout(g).map_err(transform_failure)?.into(),
                (_, Machine::General(_)) => {
                    return Err(Failure::new("usage", "machines with guards and timeouts cannot be converted"))
                }
            };
            Ok(machine_output(&converted))
        }
        Command::Embed { machine } => {
            let m = load(machine)?;
            Ok(machine_output(&Machine::General(embed(&m))))
        }
    }
}

fn machine_output(m: &Machine) -> Output {
    let text = serialize_machine(m);
    let json = serde_json::from_str(&text).expect("serialized machine is JSON");
    Output::ok(text, json)
}

fn transform_failure(e: TransformError) -> Failure {
    let (category, extra) = match &e {
        TransformError::NotLoopFree { cycle } => ("not_loop_free", json!({ "cycle": cycle })),
        TransformError::NotLcro { transition } => (
            "not_lcro",
            json!({ "state": transition.source, "input": transition.input, "guard": transition.guard.to_string() }),
        ),
    };
    Failure { category, message: e.to_string(), extra: Some(extra) }
}

/// Runs the tool on `args` (including the program name) and returns the
/// exit code.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(o) => {
            let _ =
                if cli.json { out.write_all(to_pretty(&o.json).as_bytes()) } else { out.write_all(o.text.as_bytes()) };
            o.code
        }
        Err(f) => {
            if cli.json {
                let mut doc = json!({ "error": f.category, "message": f.message });
                if let Some(Value::Object(extra)) = f.extra {
                    doc.as_object_mut().expect("object").extend(extra);
                }
                let _ = out.write_all(to_pretty(&doc).as_bytes());
            } else {
                let _ = writeln!(err, "error: {}", f.message);
            }
            2
        }
    }
}
