//! Machine-level animation: loading, initialisation, enabled operations and
//! invariant checking.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::ControlFlow;
use std::sync::Arc;

use super::exec::{collect_successors, exec, Successor, SuccessorSet};
use crate::error::{EvalError, EvalResult, Result};
use crate::interp::{eval_predicate, for_each_solution};
use crate::state::{Environment, EvalConfig, State};
use crate::syntax::{expand_machine, parse_machine, pretty_print, Kind, Node, Operation};
use crate::typing::{infer_machine, BType, TypedMachine};
use crate::values::{render, Value};

/// Parse, expand definitions and type a machine.
pub fn load_machine(source: &str) -> Result<TypedMachine> {
    let ast = parse_machine(source)?;
    let ast = expand_machine(&ast)?;
    Ok(infer_machine(ast)?)
}

/// Environment for `machine` with no state bound.
pub fn machine_environment(machine: TypedMachine, config: EvalConfig) -> Environment {
    Environment::for_machine(Arc::new(machine), config)
}

fn machine_of(env: &Environment) -> EvalResult<Arc<TypedMachine>> {
    env.machine()
        .cloned()
        .ok_or_else(|| EvalError::Unsupported("no machine loaded".into()))
}

fn typed_ids(nodes: &[Node], machine: &TypedMachine) -> EvalResult<Vec<(String, BType)>> {
    nodes
        .iter()
        .map(|n| {
            let name = n.identifier_name().expect("identifier node");
            let ty = n
                .ty
                .clone()
                .or_else(|| machine.type_of(name).cloned())
                .ok_or_else(|| EvalError::UnknownIdentifier(name.to_owned()))?;
            Ok((name.to_owned(), ty))
        })
        .collect()
}

/// Constant valuations satisfying PROPERTIES, in enumeration order.
pub fn set_up_constants(env: &mut Environment) -> EvalResult<Vec<BTreeMap<String, Value>>> {
    let machine = machine_of(env)?;
    env.unbind_state();
    let ids = typed_ids(&machine.ast.constants, &machine)?;
    let mut out = Vec::new();
    let _ = for_each_solution(&ids, machine.ast.properties.as_ref(), env, &mut |env| {
        let valuation = ids
            .iter()
            .map(|(n, _)| Ok((n.clone(), env.lookup(n)?.clone())))
            .collect::<EvalResult<_>>()?;
        out.push(valuation);
        Ok(ControlFlow::Continue(()))
    })?;
    if out.is_empty() {
        return Err(EvalError::NoConstantsFound);
    }
    Ok(out)
}

/// Root states: every constant valuation crossed with every INITIALISATION
/// branch. Equal roots are merged.
pub fn initialise(env: &mut Environment) -> EvalResult<Vec<Successor>> {
    let machine = machine_of(env)?;
    let variables = machine.variable_names();
    let mut roots = Vec::new();
    for constants in set_up_constants(env)? {
        env.unbind_state();
        for (k, x) in &constants {
            env.bind_state(k, x.clone());
        }
        let branches = match &machine.ast.initialisation {
            Some(init) => exec(init, env)?,
            None => vec![Default::default()],
        };
        for b in branches {
            if let Some(missing) = variables.iter().find(|x| !b.writes.contains_key(**x)) {
                return Err(EvalError::UninitialisedVariable((*missing).to_owned()));
            }
            roots.push((State::new(constants.clone(), b.writes), b.labels));
        }
    }
    env.unbind_state();
    Ok(collect_successors(roots))
}

/// One enabled instance of an operation.
#[derive(Debug, Clone, PartialEq)]
pub struct EnabledOperation {
    pub name: String,
    pub params: Vec<(String, Value)>,
    pub successors: SuccessorSet,
}

impl EnabledOperation {
    /// `name` or `name(v1,v2)`.
    pub fn label(&self) -> String {
        if self.params.is_empty() {
            self.name.clone()
        } else {
            let args: Vec<String> = self.params.iter().map(|(_, x)| render(x)).collect();
            format!("{}({})", self.name, args.join(","))
        }
    }
}

/// Enabled instances in declaration order, plus operations whose parameter
/// search failed. A failure affects only its own operation.
#[derive(Debug, Clone, Default)]
pub struct Enabled {
    pub operations: Vec<EnabledOperation>,
    pub errors: Vec<(String, EvalError)>,
}

/// Enabled instances of a single operation in state `s`.
pub fn operation_instances(op: &Operation, env: &mut Environment, s: &State) -> EvalResult<Vec<EnabledOperation>> {
    let machine = machine_of(env)?;
    let params = typed_ids(&op.params, &machine)?;
    let guard = match op.body.kind {
        Kind::Precondition => Some(&op.body.children[0]),
        _ => None,
    };
    env.restore(s);
    let mut out = Vec::new();
    let _ = for_each_solution(&params, guard, env, &mut |env| {
        let valuation: Vec<(String, Value)> = params
            .iter()
            .map(|(n, _)| Ok((n.clone(), env.lookup(n)?.clone())))
            .collect::<EvalResult<_>>()?;
        let branches = exec(&op.body, env)?;
        if !branches.is_empty() {
            out.push(EnabledOperation {
                name: op.name.clone(),
                params: valuation,
                successors: SuccessorSet {
                    from: s.clone(),
                    successors: collect_successors(
                        branches.into_iter().map(|b| (s.with_variables(&b.writes), b.labels)),
                    ),
                },
            });
        }
        Ok(ControlFlow::Continue(()))
    })?;
    Ok(out)
}

pub fn enabled_operations(env: &mut Environment, s: &State) -> EvalResult<Enabled> {
    let machine = machine_of(env)?;
    let mut enabled = Enabled::default();
    for op in &machine.ast.operations {
        match operation_instances(op, env, s) {
            Ok(found) => enabled.operations.extend(found),
            Err(e) => enabled.errors.push((op.name.clone(), e)),
        }
    }
    Ok(enabled)
}

/// Truth value of one conjunct.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    True,
    False,
    Error(String),
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::True => f.write_str("TRUE"),
            Outcome::False => f.write_str("FALSE"),
            Outcome::Error(e) => write!(f, "ERROR {e}"),
        }
    }
}

/// A conjunct and its outcome.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClauseResult {
    pub clause: String,
    pub outcome: Outcome,
}

/// Evaluate each top-level conjunct of `pred` separately.
pub fn evaluate_conjuncts(pred: &Node, env: &mut Environment) -> Vec<ClauseResult> {
    pred.conjuncts()
        .into_iter()
        .map(|c| ClauseResult {
            clause: pretty_print(c),
            outcome: match eval_predicate(c, env) {
                Ok(true) => Outcome::True,
                Ok(false) => Outcome::False,
                Err(e) => Outcome::Error(e.to_string()),
            },
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InvariantVerdict {
    Ok,
    /// Pretty-printed failed conjuncts.
    Violation(Vec<String>),
    /// The first conjunct whose evaluation failed, with the error.
    Error { clause: String, error: String },
}

impl fmt::Display for InvariantVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InvariantVerdict::Ok => f.write_str("invariant OK"),
            InvariantVerdict::Violation(cs) => write!(f, "invariant VIOLATED: {}", cs.join(" ; ")),
            InvariantVerdict::Error { clause, error } => write!(f, "invariant ERROR in {clause}: {error}"),
        }
    }
}

pub fn check_invariant(env: &mut Environment, s: &State) -> EvalResult<InvariantVerdict> {
    let machine = machine_of(env)?;
    let Some(inv) = &machine.ast.invariant else {
        return Ok(InvariantVerdict::Ok);
    };
    env.restore(s);
    let results = evaluate_conjuncts(inv, env);
    if let Some(r) = results.iter().find(|r| matches!(r.outcome, Outcome::Error(_))) {
        let Outcome::Error(error) = &r.outcome else { unreachable!() };
        return Ok(InvariantVerdict::Error {
            clause: r.clause.clone(),
            error: error.clone(),
        });
    }
    let failed: Vec<String> = results
        .into_iter()
        .filter(|r| r.outcome == Outcome::False)
        .map(|r| r.clause)
        .collect();
    Ok(if failed.is_empty() {
        InvariantVerdict::Ok
    } else {
        InvariantVerdict::Violation(failed)
    })
}
