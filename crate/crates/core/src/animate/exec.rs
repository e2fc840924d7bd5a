//! Substitutions as branching state transformers.
//!
//! A substitution is executed against the state frame of an environment and
//! yields one [`Branch`] per execution path: the variables it writes and the
//! choices taken. Writes are relative to the source state, so `||` can detect
//! double writes and `;` can compose branch sets.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::ControlFlow;

use crate::error::{EvalError, EvalResult};
use crate::interp::{binders, eval_expression, eval_predicate, for_each_solution};
use crate::state::{Environment, State};
use crate::syntax::{Kind, Node};
use crate::typing::BType;
use crate::values::{self as v, render, Value};

/// Variables written by one execution path.
pub type Writes = BTreeMap<String, Value>;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Branch {
    pub writes: Writes,
    /// Choices made along the path, outermost first.
    pub labels: Vec<String>,
}

/// One distinct successor and every path that reaches it.
#[derive(Debug, Clone, PartialEq)]
pub struct Successor {
    pub state: State,
    pub traces: Vec<Vec<String>>,
}

/// Distinct successors of `from` in derivation order; empty iff disabled.
#[derive(Debug, Clone, PartialEq)]
pub struct SuccessorSet {
    pub from: State,
    pub successors: Vec<Successor>,
}

impl SuccessorSet {
    pub fn is_empty(&self) -> bool {
        self.successors.is_empty()
    }

    pub fn len(&self) -> usize {
        self.successors.len()
    }

    pub fn states(&self) -> impl Iterator<Item = &State> {
        self.successors.iter().map(|s| &s.state)
    }
}

impl fmt::Display for SuccessorSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.successors.iter().enumerate() {
            writeln!(f, "successor {}:", i + 1)?;
            write!(f, "{}", s.state)?;
        }
        Ok(())
    }
}

/// Merge equal states, keeping first-derivation order.
pub(crate) fn collect_successors(items: impl IntoIterator<Item = (State, Vec<String>)>) -> Vec<Successor> {
    let mut out: Vec<Successor> = Vec::new();
    for (state, trace) in items {
        match out.iter_mut().find(|s| s.state == state) {
            Some(s) => s.traces.push(trace),
            None => out.push(Successor {
                state,
                traces: vec![trace],
            }),
        }
    }
    out
}

/// Successors of `s` under `node`. The environment's state frame is left
/// holding `s`.
pub fn exec_substitution(node: &Node, env: &mut Environment, s: &State) -> EvalResult<SuccessorSet> {
    env.restore(s);
    let branches = exec(node, env)?;
    let successors = collect_successors(
        branches
            .into_iter()
            .map(|b| (s.with_variables(&b.writes), b.labels)),
    );
    Ok(SuccessorSet {
        from: s.clone(),
        successors,
    })
}

/// Branches of `node` executed in the current state frame. The frame is
/// unchanged afterwards.
pub fn exec(node: &Node, env: &mut Environment) -> EvalResult<Vec<Branch>> {
    match &node.kind {
        Kind::Skip => Ok(vec![Branch::default()]),
        Kind::Block => exec(&node.children[0], env),
        Kind::Assign => assign(&node.children[0], &node.children[1], env).map(|w| {
            vec![Branch {
                writes: w,
                labels: Vec::new(),
            }]
        }),
        Kind::BecomesElementOf => {
            let targets = target_names(&node.children[0])?;
            let lim = *env.limits();
            let set = eval_expression(&node.children[1], env)?;
            let elements = v::reify(&set, &lim)?;
            elements
                .iter()
                .map(|x| {
                    let writes = untuple(x, targets.len())?
                        .into_iter()
                        .zip(&targets)
                        .map(|(x, t)| (t.clone(), x))
                        .collect();
                    Ok(Branch {
                        writes,
                        labels: vec![format!("{} :: {}", targets.join(","), render(x))],
                    })
                })
                .collect()
        }
        Kind::BecomesSuchThat => {
            let ids = target_types(&node.children[0], env)?;
            let mut out = Vec::new();
            let _ = for_each_solution(&ids, Some(&node.children[1]), env, &mut |env| {
                let writes: Writes = ids
                    .iter()
                    .map(|(n, _)| Ok((n.clone(), env.lookup(n)?.clone())))
                    .collect::<EvalResult<_>>()?;
                out.push(Branch {
                    labels: vec![describe(&writes)],
                    writes,
                });
                Ok(ControlFlow::Continue(()))
            })?;
            Ok(out)
        }
        Kind::Sequence => {
            let mut out = Vec::new();
            for first in exec(&node.children[0], env)? {
                let rest = with_writes(env, &first.writes, |env| exec(&node.children[1], env))?;
                for second in rest {
                    let mut writes = first.writes.clone();
                    writes.extend(second.writes);
                    let mut labels = first.labels.clone();
                    labels.extend(second.labels);
                    out.push(Branch { writes, labels });
                }
            }
            Ok(out)
        }
        Kind::Parallel => {
            let left = exec(&node.children[0], env)?;
            let right = exec(&node.children[1], env)?;
            let mut out = Vec::with_capacity(left.len() * right.len());
            for l in &left {
                for r in &right {
                    if let Some(id) = l.writes.keys().find(|k| r.writes.contains_key(*k)) {
                        return Err(EvalError::DoubleWrite(id.clone()));
                    }
                    let mut writes = l.writes.clone();
                    writes.extend(r.writes.clone());
                    let mut labels = l.labels.clone();
                    labels.extend(r.labels.iter().cloned());
                    out.push(Branch { writes, labels });
                }
            }
            Ok(out)
        }
        Kind::Precondition => {
            if eval_predicate(&node.children[0], env)? {
                exec(&node.children[1], env)
            } else {
                Ok(Vec::new())
            }
        }
        Kind::If => {
            let taken = if eval_predicate(&node.children[0], env)? { 1 } else { 2 };
            exec(&node.children[taken], env)
        }
        Kind::Select { has_else } => {
            let arms = node.children.len() / 2;
            let mut out = Vec::new();
            for k in 0..arms {
                if eval_predicate(&node.children[2 * k], env)? {
                    out.extend(labelled(exec(&node.children[2 * k + 1], env)?, format!("WHEN {}", k + 1)));
                }
            }
            if out.is_empty() && *has_else {
                let last = node.children.last().expect("else branch");
                out = labelled(exec(last, env)?, "ELSE".to_owned());
            }
            Ok(out)
        }
        Kind::Choice => {
            let mut out = Vec::new();
            for (k, arm) in node.children.iter().enumerate() {
                out.extend(labelled(exec(arm, env)?, format!("CHOICE {}", k + 1)));
            }
            Ok(out)
        }
        Kind::Any => {
            let ids = binders(&node.children[0])?;
            let body = &node.children[2];
            let mut out = Vec::new();
            let _ = for_each_solution(&ids, Some(&node.children[1]), env, &mut |env| {
                let bound: Writes = ids
                    .iter()
                    .map(|(n, _)| Ok((n.clone(), env.lookup(n)?.clone())))
                    .collect::<EvalResult<_>>()?;
                out.extend(labelled(exec(body, env)?, format!("ANY {}", describe(&bound))));
                Ok(ControlFlow::Continue(()))
            })?;
            Ok(out)
        }
        Kind::Call(name) => Err(EvalError::UnknownOperation(name.clone())),
        other => Err(EvalError::Unsupported(format!("{other:?} is not a substitution"))),
    }
}

fn labelled(branches: Vec<Branch>, label: String) -> Vec<Branch> {
    branches
        .into_iter()
        .map(|mut b| {
            b.labels.insert(0, label.clone());
            b
        })
        .collect()
}

fn describe(bindings: &Writes) -> String {
    bindings
        .iter()
        .map(|(k, x)| format!("{k}={}", render(x)))
        .collect::<Vec<_>>()
        .join(",")
}

/// Run `f` with `writes` applied to the state frame, then undo them.
fn with_writes<T>(env: &mut Environment, writes: &Writes, f: impl FnOnce(&mut Environment) -> T) -> T {
    let saved: Vec<(String, Option<Value>)> = writes
        .keys()
        .map(|k| (k.clone(), env.state_value(k).cloned()))
        .collect();
    for (k, x) in writes {
        env.set_state_value(k, Some(x.clone()));
    }
    let out = f(env);
    for (k, old) in saved {
        env.set_state_value(&k, old);
    }
    out
}

/// `x, f(i) := e1, e2`: every right-hand side and index is read in the
/// source state before anything is written.
fn assign(targets: &Node, values: &Node, env: &mut Environment) -> EvalResult<Writes> {
    let lim = *env.limits();
    let values = values
        .children
        .iter()
        .map(|e| v::canonical(&eval_expression(e, env)?, &lim))
        .collect::<EvalResult<Vec<_>>>()?;
    let mut writes = Writes::new();
    for (t, x) in targets.children.iter().zip(values) {
        let (name, x) = match &t.kind {
            Kind::Identifier(name) => (name.clone(), x),
            Kind::Apply => {
                let name = t.children[0]
                    .identifier_name()
                    .ok_or_else(|| EvalError::Unsupported("assignment target".into()))?
                    .to_owned();
                let f = eval_expression(&t.children[0], env)?;
                let args = t.children[1..]
                    .iter()
                    .map(|a| v::canonical(&eval_expression(a, env)?, &lim))
                    .collect::<EvalResult<Vec<_>>>()?;
                let update = Value::set_of([Value::pair(Value::tuple(args), x)]);
                (name, v::override_relation(&f, &update, &lim)?)
            }
            _ => return Err(EvalError::Unsupported("assignment target".into())),
        };
        if writes.insert(name.clone(), x).is_some() {
            return Err(EvalError::DoubleWrite(name));
        }
    }
    Ok(writes)
}

fn target_names(list: &Node) -> EvalResult<Vec<String>> {
    list.children
        .iter()
        .map(|t| {
            t.identifier_name()
                .map(str::to_owned)
                .ok_or_else(|| EvalError::Unsupported("assignment target".into()))
        })
        .collect()
}

fn target_types(list: &Node, env: &Environment) -> EvalResult<Vec<(String, BType)>> {
    list.children
        .iter()
        .map(|t| {
            let name = t
                .identifier_name()
                .ok_or_else(|| EvalError::Unsupported("assignment target".into()))?;
            let ty = env
                .machine()
                .and_then(|m| m.type_of(name).cloned())
                .or_else(|| t.ty.clone())
                .ok_or_else(|| EvalError::UnknownIdentifier(name.to_owned()))?;
            Ok((name.to_owned(), ty))
        })
        .collect()
}

/// Split a left-nested tuple into `n` components.
fn untuple(x: &Value, n: usize) -> EvalResult<Vec<Value>> {
    let mut out = Vec::with_capacity(n);
    let mut cur = x.clone();
    for _ in 1..n {
        let (a, b) = cur.as_pair()?;
        let (a, b) = (a.clone(), b.clone());
        out.push(b);
        cur = a;
    }
    out.push(cur);
    out.reverse();
    Ok(out)
}
