//! Trace files and their replay.
//!
//! One step per line:
//!
//! ```text
//! OP <name> -> #PREDICATE <conjunction>
//! OP <name>(<arg>, ...) -> #PREDICATE <conjunction>
//! ```
//!
//! Blank lines and lines starting with `//` are ignored. The conjunction
//! binds the post-state; every variable must appear, constants may be
//! omitted and are then carried over. An optional first line
//! `INIT -> #PREDICATE <conjunction>` selects the root state.

use std::fmt;

use serde::Serialize;

use super::statefile::{closed_context, complete_state, parse_bindings};
use crate::animate::{initialise, operation_instances};
use crate::error::{Error, EvalError, Result, StateFileError};
use crate::interp::eval_expression;
use crate::state::{Environment, State};
use crate::syntax::{parse_expression_list, pretty_print, Node};
use crate::typing::infer_expression_as;
use crate::values::{self as v, render, Value};

const ARROW: &str = "-> #PREDICATE";

#[derive(Debug, Clone)]
pub struct TraceStep {
    pub line: usize,
    /// `None` for the `INIT` line.
    pub operation: Option<String>,
    pub args: Vec<Node>,
    /// `#PREDICATE ...` text of the expected post-state.
    pub post: String,
}

impl TraceStep {
    pub fn label(&self) -> String {
        match &self.operation {
            None => "INIT".to_owned(),
            Some(op) if self.args.is_empty() => op.clone(),
            Some(op) => {
                let args: Vec<String> = self.args.iter().map(pretty_print).collect();
                format!("{op}({})", args.join(","))
            }
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct TraceFile {
    pub steps: Vec<TraceStep>,
}

fn trace_error(line: usize, message: impl Into<String>) -> Error {
    StateFileError::Trace {
        line,
        message: message.into(),
    }
    .into()
}

pub fn parse_trace(text: &str) -> Result<TraceFile> {
    let mut steps = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.trim();
        if content.is_empty() || content.starts_with("//") {
            continue;
        }
        let Some(at) = content.find(ARROW) else {
            return Err(trace_error(line, format!("expected `... {ARROW} ...`")));
        };
        let head = content[..at].trim();
        let post = content[at + 3..].to_owned();
        let (operation, args) = if head == "INIT" {
            if !steps.is_empty() {
                return Err(trace_error(line, "INIT must be the first step"));
            }
            (None, Vec::new())
        } else {
            let Some(call) = head.strip_prefix("OP ") else {
                return Err(trace_error(line, "a step starts with `OP` or `INIT`"));
            };
            let call = call.trim();
            match call.find('(') {
                None => (Some(call.to_owned()), Vec::new()),
                Some(open) => {
                    let inner = call[open + 1..]
                        .strip_suffix(')')
                        .ok_or_else(|| trace_error(line, "unbalanced argument list"))?;
                    let args = parse_expression_list(inner).map_err(|e| trace_error(line, e.to_string()))?;
                    (Some(call[..open].trim().to_owned()), args)
                }
            }
        };
        steps.push(TraceStep {
            line,
            operation,
            args,
            post,
        });
    }
    Ok(TraceFile { steps })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum StepOutcome {
    Agree,
    OperationNotEnabled,
    /// No successor equals the expected state. `differences` names the
    /// identifiers that differ from the closest successor.
    NoMatchingSuccessor {
        differences: Vec<String>,
        successors: Vec<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StepVerdict {
    pub step: usize,
    pub line: usize,
    pub label: String,
    pub outcome: StepOutcome,
}

impl fmt::Display for StepVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "STEP {} {}: ", self.step, self.label)?;
        match &self.outcome {
            StepOutcome::Agree => write!(f, "AGREE"),
            StepOutcome::OperationNotEnabled => write!(f, "DISAGREE operation not enabled"),
            StepOutcome::NoMatchingSuccessor { differences, successors } => {
                write!(
                    f,
                    "DISAGREE no matching successor (differs in {}); successors: {}",
                    differences.join(", "),
                    successors.join(" | ")
                )
            }
        }
    }
}

/// Per-step verdicts up to and including the first disagreement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceVerdict {
    pub steps: Vec<StepVerdict>,
}

impl TraceVerdict {
    pub fn agrees(&self) -> bool {
        self.steps.iter().all(|s| s.outcome == StepOutcome::Agree)
    }

    pub fn report(&self) -> String {
        let mut out: String = self.steps.iter().map(|s| format!("{s}\n")).collect();
        out.push_str(if self.agrees() { "VERDICT: AGREE\n" } else { "VERDICT: DISAGREE\n" });
        out
    }

    pub fn to_json(&self) -> String {
        let doc = serde_json::json!({
            "outcome": if self.agrees() { "AGREE" } else { "DISAGREE" },
            "steps": self.steps,
        });
        serde_json::to_string_pretty(&doc).expect("trace verdict serialises")
    }
}

fn one_line(s: &State) -> String {
    s.constants()
        .iter()
        .chain(s.variables())
        .map(|(k, x)| format!("{k}={}", render(x)))
        .collect::<Vec<_>>()
        .join(",")
}

fn no_match(expected: &State, candidates: &[State]) -> StepOutcome {
    let differences = candidates
        .iter()
        .map(|c| c.differences(expected))
        .min_by_key(Vec::len)
        .unwrap_or_default();
    StepOutcome::NoMatchingSuccessor {
        differences,
        successors: candidates.iter().map(one_line).collect(),
    }
}

fn eval_args(step: &TraceStep, types: &[crate::typing::BType], env: &mut Environment) -> Result<Vec<Value>> {
    let machine = env.machine().cloned().expect("machine loaded");
    if step.args.len() != types.len() {
        return Err(trace_error(
            step.line,
            format!("expected {} arguments, found {}", types.len(), step.args.len()),
        ));
    }
    let mut ctx = closed_context(&machine, env);
    let lim = *env.limits();
    step.args
        .iter()
        .zip(types)
        .map(|(a, ty)| {
            let mut a = a.clone();
            infer_expression_as(&mut a, ty, &mut ctx).map_err(|e| trace_error(step.line, e.to_string()))?;
            Ok(eval_expression(&a, env).and_then(|x| v::canonical(&x, &lim))?)
        })
        .collect()
}

/// Replay `trace` from the root selected by its `INIT` line, or from root
/// number `root` (0-based) when there is none.
pub fn check_trace(env: &mut Environment, trace: &TraceFile, root: usize) -> Result<TraceVerdict> {
    let machine = env
        .machine()
        .cloned()
        .ok_or_else(|| EvalError::Unsupported("no machine loaded".into()))?;
    let roots: Vec<State> = initialise(env)?.into_iter().map(|s| s.state).collect();
    let mut verdicts = Vec::new();
    let mut steps = trace.steps.iter().peekable();
    let mut current = match steps.peek() {
        Some(first) if first.operation.is_none() => {
            let first = steps.next().expect("peeked");
            let bindings = parse_bindings(&first.post, env)?;
            let expected = complete_state(&machine, bindings, None)?;
            let outcome = if roots.contains(&expected) {
                StepOutcome::Agree
            } else {
                no_match(&expected, &roots)
            };
            verdicts.push(StepVerdict {
                step: 0,
                line: first.line,
                label: first.label(),
                outcome: outcome.clone(),
            });
            if outcome != StepOutcome::Agree {
                return Ok(TraceVerdict { steps: verdicts });
            }
            expected
        }
        _ => roots
            .get(root)
            .cloned()
            .ok_or_else(|| EvalError::Unsupported(format!("no root state number {}", root + 1)))?,
    };
    for (k, step) in steps.enumerate() {
        let name = step.operation.as_deref().expect("only the first step is INIT");
        let op = machine
            .ast
            .operation(name)
            .ok_or_else(|| EvalError::UnknownOperation(name.to_owned()))?;
        let types: Vec<_> = op.params.iter().map(|p| p.ty.clone().expect("typed parameter")).collect();
        let args = eval_args(step, &types, env)?;
        let bindings = parse_bindings(&step.post, env)?;
        let expected = complete_state(&machine, bindings, Some(&current))?;
        let instances = operation_instances(op, env, &current)?;
        let matching: Vec<State> = instances
            .iter()
            .filter(|i| i.params.iter().map(|(_, x)| x).eq(args.iter()))
            .flat_map(|i| i.successors.states().cloned())
            .collect();
        let outcome = if matching.is_empty() {
            StepOutcome::OperationNotEnabled
        } else if matching.contains(&expected) {
            StepOutcome::Agree
        } else {
            no_match(&expected, &matching)
        };
        let agree = outcome == StepOutcome::Agree;
        verdicts.push(StepVerdict {
            step: k + 1,
            line: step.line,
            label: step.label(),
            outcome,
        });
        if !agree {
            break;
        }
        current = expected;
    }
    Ok(TraceVerdict { steps: verdicts })
}
