//! State files: `#PREDICATE` followed by a conjunction of `Id = Expr`.
//!
//! Each right-hand side must be a closed term. Only declared sets and their
//! elements (including the generated names of deferred-set elements) are in
//! scope. It is typed against the declared type of its identifier and must
//! evaluate to a finite value.

use std::collections::BTreeMap;

use crate::error::{Error, EvalError, Result, StateFileError};
use crate::interp::eval_expression;
use crate::state::{Environment, State};
use crate::syntax::{parse_predicate, pretty_print, tokenize, Kind, Node, ParseError, TokenKind};
use crate::typing::{infer_expression_as, BType, TypeContext, TypedMachine};
use crate::values::{self as v, Value};

/// Typing context for closed state-file terms.
pub fn closed_context(machine: &TypedMachine, env: &Environment) -> TypeContext {
    let mut ctx = TypeContext::with_sets(&machine.ast.sets);
    for decl in machine.ast.sets.iter().filter(|d| !d.is_enumerated()) {
        for i in 1..=env.config().deferred_set_card {
            ctx.declare(&format!("{}{i}", decl.name), BType::Deferred(decl.name.clone()));
        }
    }
    ctx
}

fn require_marker(text: &str) -> Result<()> {
    let tokens = tokenize(text)?;
    match tokens.first() {
        Some(t) if t.kind == TokenKind::PredicateMarker => Ok(()),
        Some(t) => Err(ParseError::new(t.span, "#PREDICATE", t.kind.to_string()).into()),
        None => Err(ParseError::new(Default::default(), "#PREDICATE", "end of input").into()),
    }
}

/// Bindings of a `#PREDICATE` body, in file order of first appearance.
pub fn parse_bindings(text: &str, env: &mut Environment) -> Result<BTreeMap<String, Value>> {
    let machine = env
        .machine()
        .cloned()
        .ok_or_else(|| EvalError::Unsupported("no machine loaded".into()))?;
    require_marker(text)?;
    let mut unit = parse_predicate(text)?;
    let mut ctx = closed_context(&machine, env);
    let lim = *env.limits();
    let mut out = BTreeMap::new();
    for eq in conjuncts_mut(&mut unit.root) {
        let equation = pretty_print(eq);
        let name = match (&eq.kind, eq.children.first().and_then(Node::identifier_name)) {
            (Kind::Equal, Some(name)) => name.to_owned(),
            _ => {
                return Err(StateFileError::NotAnEquality {
                    span: eq.span,
                    found: equation,
                }
                .into())
            }
        };
        let ty = machine
            .type_of(&name)
            .filter(|_| machine.ast.is_constant(&name) || machine.ast.variable_names().contains(&name.as_str()))
            .cloned()
            .ok_or_else(|| StateFileError::UnknownIdentifier(name.clone()))?;
        if out.contains_key(&name) {
            return Err(StateFileError::DuplicateIdentifier(name).into());
        }
        let rhs = &mut eq.children[1];
        infer_expression_as(rhs, &ty, &mut ctx).map_err(|source| StateFileError::Type {
            equation: equation.clone(),
            source,
        })?;
        let value = eval_expression(rhs, env)
            .and_then(|x| v::canonical(&x, &lim))
            .map_err(|source| StateFileError::Eval {
                equation: equation.clone(),
                source,
            })?;
        if !v::is_finite(&value) {
            return Err(StateFileError::NotReifiable { equation }.into());
        }
        out.insert(name, value);
    }
    Ok(out)
}

fn conjuncts_mut(node: &mut Node) -> Vec<&mut Node> {
    if node.kind == Kind::And {
        node.children.iter_mut().flat_map(conjuncts_mut).collect()
    } else {
        vec![node]
    }
}

/// Split bindings into a complete state. Identifiers absent from the file
/// are taken from `defaults` when given, otherwise reported missing.
pub fn complete_state(
    machine: &TypedMachine,
    mut bindings: BTreeMap<String, Value>,
    defaults: Option<&State>,
) -> Result<State, StateFileError> {
    let mut take = |names: Vec<&str>| -> Result<BTreeMap<String, Value>, StateFileError> {
        names
            .into_iter()
            .map(|n| {
                let x = bindings
                    .remove(n)
                    .or_else(|| defaults.and_then(|d| d.get(n).cloned()))
                    .ok_or_else(|| StateFileError::MissingIdentifier(n.to_owned()))?;
                Ok((n.to_owned(), x))
            })
            .collect()
    };
    let constants = take(machine.constant_names())?;
    let variables = take(machine.variable_names())?;
    Ok(State::new(constants, variables))
}

/// Load a complete state from state-file text.
pub fn load_state_text(text: &str, env: &mut Environment) -> Result<State> {
    let bindings = parse_bindings(text, env)?;
    let machine = env.machine().cloned().expect("checked by parse_bindings");
    Ok(complete_state(&machine, bindings, None)?)
}

/// Load a complete state from a file.
pub fn load_state_file(path: &std::path::Path, env: &mut Environment) -> Result<State> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    load_state_text(&text, env)
}
