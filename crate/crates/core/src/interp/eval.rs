//! Depth-first evaluation of typed expressions and predicates.
//!
//! `&`, `or` and `=>` short-circuit left to right. Well-definedness
//! violations in evaluated positions are errors, never `FALSE`.

use std::collections::BTreeSet;
use std::ops::ControlFlow;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use super::solve::{binders, for_each_solution};
use crate::error::{EvalError, EvalResult, WdKind};
use crate::state::Environment;
use crate::syntax::{BuiltinSet, Kind, Node};
use crate::values::{self as v, SymbolicSet, Value};

/// Results larger than this many bits are refused.
const MAX_POWER_BITS: u64 = 1 << 20;

fn int(node: &Node, env: &mut Environment) -> EvalResult<BigInt> {
    match eval_expression(node, env)? {
        Value::Int(n) => Ok(n),
        other => Err(EvalError::confusion("an integer", other)),
    }
}

fn two(node: &Node, env: &mut Environment) -> EvalResult<(Value, Value)> {
    let a = eval_expression(&node.children[0], env)?;
    let b = eval_expression(&node.children[1], env)?;
    Ok((a, b))
}

fn one(node: &Node, env: &mut Environment) -> EvalResult<Value> {
    eval_expression(&node.children[0], env)
}

fn power(base: &BigInt, exp: &BigInt) -> EvalResult<BigInt> {
    if exp.is_negative() {
        return Err(EvalError::wd(WdKind::NegativeExponent, format!("{base} ** {exp}")));
    }
    if base.is_zero() {
        return Ok(BigInt::from(u8::from(exp.is_zero())));
    }
    if base.abs() == BigInt::from(1) {
        return Ok(if base.is_negative() && exp.bit(0) {
            BigInt::from(-1)
        } else {
            BigInt::from(1)
        });
    }
    let e = exp
        .to_u64()
        .filter(|e| e.saturating_mul(base.bits()) <= MAX_POWER_BITS)
        .ok_or_else(|| EvalError::wd(WdKind::ExponentTooLarge, format!("{base} ** {exp}")))?;
    Ok(num_traits::pow(base.clone(), e as usize))
}

fn builtin(b: BuiltinSet, env: &Environment) -> Value {
    let cfg = env.config();
    match b {
        BuiltinSet::Integer => Value::symbolic(SymbolicSet::Integer),
        BuiltinSet::Natural => Value::symbolic(SymbolicSet::Natural),
        BuiltinSet::Natural1 => Value::symbolic(SymbolicSet::Natural1),
        BuiltinSet::Nat => Value::interval(BigInt::zero(), cfg.maxint.clone()),
        BuiltinSet::Nat1 => Value::interval(BigInt::from(1), cfg.maxint.clone()),
        BuiltinSet::Int => Value::interval(cfg.minint.clone(), cfg.maxint.clone()),
        BuiltinSet::Bool => Value::set_of([Value::Bool(false), Value::Bool(true)]),
        BuiltinSet::String => Value::symbolic(SymbolicSet::Strings),
    }
}

/// Value of an expression node.
pub fn eval_expression(node: &Node, env: &mut Environment) -> EvalResult<Value> {
    use Kind::*;
    let lim = *env.limits();
    let lim = &lim;
    Ok(match &node.kind {
        Integer(n) => Value::Int(n.clone()),
        String(s) => Value::Str(s.clone()),
        True => Value::Bool(true),
        False => Value::Bool(false),
        Identifier(name) => env.lookup(name)?.clone(),
        Builtin(b) => builtin(*b, env),
        MaxInt => Value::Int(env.config().maxint.clone()),
        MinInt => Value::Int(env.config().minint.clone()),
        EmptySet | EmptySequence => Value::empty_set(),
        Add => Value::Int(int(&node.children[0], env)? + int(&node.children[1], env)?),
        Mult => Value::Int(int(&node.children[0], env)? * int(&node.children[1], env)?),
        Div => {
            let a = int(&node.children[0], env)?;
            let b = int(&node.children[1], env)?;
            if b.is_zero() {
                return Err(EvalError::wd(WdKind::DivisionByZero, format!("{a} / 0")));
            }
            Value::Int(a / b)
        }
        Mod => {
            let a = int(&node.children[0], env)?;
            let b = int(&node.children[1], env)?;
            if a.is_negative() || !b.is_positive() {
                return Err(EvalError::wd(WdKind::ModuloDomain, format!("{a} mod {b}")));
            }
            Value::Int(a % b)
        }
        Power => {
            let a = int(&node.children[0], env)?;
            let b = int(&node.children[1], env)?;
            Value::Int(power(&a, &b)?)
        }
        UnaryMinus => Value::Int(-int(&node.children[0], env)?),
        Succ => Value::Int(int(&node.children[0], env)? + 1u32),
        Pred => Value::Int(int(&node.children[0], env)? - 1u32),
        MinusOrSetSubtract => {
            let (a, b) = two(node, env)?;
            v::subtract_overloaded(&a, &b, lim)?
        }
        MultOrCart => match two(node, env)? {
            (Value::Int(a), Value::Int(b)) => Value::Int(a * b),
            (a, b) => v::product(&a, &b, lim)?,
        },
        Cartesian => {
            let (a, b) = two(node, env)?;
            v::product(&a, &b, lim)?
        }
        SetExtension => {
            let mut out = BTreeSet::new();
            for c in &node.children {
                let x = eval_expression(c, env)?;
                out.insert(v::canonical(&x, lim)?);
            }
            Value::Set(Arc::new(out))
        }
        SequenceExtension => {
            let mut items = Vec::new();
            for c in &node.children {
                let x = eval_expression(c, env)?;
                items.push(v::canonical(&x, lim)?);
            }
            v::make_sequence(items)
        }
        Interval => {
            let lo = int(&node.children[0], env)?;
            let hi = int(&node.children[1], env)?;
            Value::interval(lo, hi)
        }
        PowerSet | FinSet | PowerSet1 | FinSet1 => Value::symbolic(SymbolicSet::PowerSet {
            base: one(node, env)?,
            nonempty: matches!(node.kind, PowerSet1 | FinSet1),
        }),
        Union => {
            let (a, b) = two(node, env)?;
            v::union(&a, &b, lim)?
        }
        Intersection => {
            let (a, b) = two(node, env)?;
            v::inter(&a, &b, lim)?
        }
        Card => Value::Int(v::card(&one(node, env)?, lim)?),
        Min => Value::Int(v::min(&one(node, env)?, lim)?),
        Max => Value::Int(v::max(&one(node, env)?, lim)?),
        Comprehension => eval_comprehension(node, env)?,
        Lambda => eval_lambda(node, env)?,
        BoolOf => Value::Bool(eval_predicate(&node.children[0], env)?),
        Pair => {
            let (a, b) = two(node, env)?;
            Value::pair(a, b)
        }
        Relations => {
            let (a, b) = two(node, env)?;
            Value::symbolic(SymbolicSet::Relations(a, b))
        }
        Functions(k) => {
            let (a, b) = two(node, env)?;
            Value::symbolic(SymbolicSet::Functions(*k, a, b))
        }
        Domain => v::domain(&one(node, env)?, lim)?,
        Range => v::range(&one(node, env)?, lim)?,
        Inverse => v::inverse(&one(node, env)?, lim)?,
        Image => {
            let (r, s) = two(node, env)?;
            v::image(&r, &s, lim)?
        }
        Composition => {
            let (a, b) = two(node, env)?;
            v::composition(&a, &b, lim)?
        }
        Override => {
            let (a, b) = two(node, env)?;
            v::override_relation(&a, &b, lim)?
        }
        DomainRestrict => {
            let (s, r) = two(node, env)?;
            v::domain_restrict(&s, &r, lim)?
        }
        DomainSubtract => {
            let (s, r) = two(node, env)?;
            v::domain_subtract(&s, &r, lim)?
        }
        RangeRestrict => {
            let (r, s) = two(node, env)?;
            v::range_restrict(&r, &s, lim)?
        }
        RangeSubtract => {
            let (r, s) = two(node, env)?;
            v::range_subtract(&r, &s, lim)?
        }
        Apply => {
            let f = eval_expression(&node.children[0], env)?;
            let mut args = Vec::with_capacity(node.children.len() - 1);
            for c in &node.children[1..] {
                args.push(eval_expression(c, env)?);
            }
            v::apply_function(&f, &Value::tuple(args), lim)?
        }
        Seq | Seq1 => Value::symbolic(SymbolicSet::Sequences {
            base: one(node, env)?,
            nonempty: node.kind == Seq1,
        }),
        Size => Value::Int(v::seq_size(&one(node, env)?, lim)?),
        Concat => {
            let (a, b) = two(node, env)?;
            v::seq_concat(&a, &b, lim)?
        }
        First => v::seq_first(&one(node, env)?, lim)?,
        Last => v::seq_last(&one(node, env)?, lim)?,
        Front => v::seq_front(&one(node, env)?, lim)?,
        Tail => v::seq_tail(&one(node, env)?, lim)?,
        other => {
            return Err(EvalError::Unsupported(format!(
                "{other:?} is not an expression"
            )))
        }
    })
}

/// Truth value of a predicate node.
pub fn eval_predicate(node: &Node, env: &mut Environment) -> EvalResult<bool> {
    use Kind::*;
    let lim = *env.limits();
    let lim = &lim;
    let cmp = |node: &Node, env: &mut Environment| -> EvalResult<std::cmp::Ordering> {
        Ok(int(&node.children[0], env)?.cmp(&int(&node.children[1], env)?))
    };
    match &node.kind {
        And => Ok(eval_predicate(&node.children[0], env)? && eval_predicate(&node.children[1], env)?),
        Or => Ok(eval_predicate(&node.children[0], env)? || eval_predicate(&node.children[1], env)?),
        Implies => Ok(!eval_predicate(&node.children[0], env)? || eval_predicate(&node.children[1], env)?),
        Equivalence => Ok(eval_predicate(&node.children[0], env)? == eval_predicate(&node.children[1], env)?),
        Not => Ok(!eval_predicate(&node.children[0], env)?),
        Forall | Exists => eval_quantifier(node, env),
        Equal | NotEqual => {
            let (a, b) = two(node, env)?;
            Ok(v::equal(&a, &b, lim)? == (node.kind == Equal))
        }
        Less => Ok(cmp(node, env)?.is_lt()),
        LessEqual => Ok(cmp(node, env)?.is_le()),
        Greater => Ok(cmp(node, env)?.is_gt()),
        GreaterEqual => Ok(cmp(node, env)?.is_ge()),
        Member | NotMember => {
            let (x, s) = two(node, env)?;
            Ok(v::contains(&s, &x, lim)? == (node.kind == Member))
        }
        Subset | NotSubset => {
            let (a, b) = two(node, env)?;
            Ok(v::is_subset(&a, &b, lim)? == (node.kind == Subset))
        }
        StrictSubset | NotStrictSubset => {
            let (a, b) = two(node, env)?;
            Ok(v::is_strict_subset(&a, &b, lim)? == (node.kind == StrictSubset))
        }
        other => Err(EvalError::Unsupported(format!("{other:?} is not a predicate"))),
    }
}

/// `!ids.(P => Q)` or `#ids.(P)`. Candidates come from the guard `P` of a
/// universal quantifier and from the whole body of an existential one.
pub fn eval_quantifier(node: &Node, env: &mut Environment) -> EvalResult<bool> {
    let ids = binders(&node.children[0])?;
    let body = &node.children[1];
    match node.kind {
        Kind::Exists => {
            let mut found = false;
            let _ = for_each_solution(&ids, Some(body), env, &mut |_| {
                found = true;
                Ok(ControlFlow::Break(()))
            })?;
            Ok(found)
        }
        Kind::Forall => {
            let (guard, goal) = if body.kind == Kind::Implies {
                (Some(&body.children[0]), &body.children[1])
            } else {
                (None, body)
            };
            let mut holds = true;
            let _ = for_each_solution(&ids, guard, env, &mut |env| {
                if eval_predicate(goal, env)? {
                    Ok(ControlFlow::Continue(()))
                } else {
                    holds = false;
                    Ok(ControlFlow::Break(()))
                }
            })?;
            Ok(holds)
        }
        _ => Err(EvalError::Unsupported("not a quantifier".into())),
    }
}

fn bound_tuple(ids: &[(String, crate::typing::BType)], env: &Environment) -> EvalResult<Value> {
    let values = ids
        .iter()
        .map(|(n, _)| env.lookup(n).cloned())
        .collect::<EvalResult<Vec<_>>>()?;
    Ok(Value::tuple(values))
}

fn collect_set(items: BTreeSet<Value>, env: &Environment) -> EvalResult<Value> {
    if items.len() > env.limits().max_set_size {
        return Err(EvalError::SizeCapExceeded {
            size: items.len().to_string(),
            cap: env.limits().max_set_size,
        });
    }
    Ok(Value::Set(Arc::new(items)))
}

/// `{ids | P}`.
pub fn eval_comprehension(node: &Node, env: &mut Environment) -> EvalResult<Value> {
    let ids = binders(&node.children[0])?;
    let mut out = BTreeSet::new();
    let _ = for_each_solution(&ids, Some(&node.children[1]), env, &mut |env| {
        out.insert(bound_tuple(&ids, env)?);
        Ok(ControlFlow::Continue(()))
    })?;
    collect_set(out, env)
}

/// `%ids.(P | E)`.
pub fn eval_lambda(node: &Node, env: &mut Environment) -> EvalResult<Value> {
    let ids = binders(&node.children[0])?;
    let expr = &node.children[2];
    let mut out = BTreeSet::new();
    let _ = for_each_solution(&ids, Some(&node.children[1]), env, &mut |env| {
        let lim = *env.limits();
        let x = bound_tuple(&ids, env)?;
        let y = v::canonical(&eval_expression(expr, env)?, &lim)?;
        out.insert(Value::pair(x, y));
        Ok(ControlFlow::Continue(()))
    })?;
    collect_set(out, env)
}
