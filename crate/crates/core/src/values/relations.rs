use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use super::sets::{card, contains, is_finite, reify};
use super::{Limits, Value};
use crate::error::{EvalError, EvalResult, WdKind};
use crate::syntax::FunctionKind;

/// The pairs of a finite relation.
pub fn pairs(rel: &Value, lim: &Limits) -> EvalResult<Vec<(Value, Value)>> {
    reify(rel, lim)?
        .iter()
        .map(|p| p.as_pair().map(|(a, b)| (a.clone(), b.clone())))
        .collect()
}

fn set(items: impl IntoIterator<Item = Value>) -> Value {
    Value::Set(Arc::new(items.into_iter().collect()))
}

pub fn domain(rel: &Value, lim: &Limits) -> EvalResult<Value> {
    Ok(set(pairs(rel, lim)?.into_iter().map(|(a, _)| a)))
}

pub fn range(rel: &Value, lim: &Limits) -> EvalResult<Value> {
    Ok(set(pairs(rel, lim)?.into_iter().map(|(_, b)| b)))
}

pub fn inverse(rel: &Value, lim: &Limits) -> EvalResult<Value> {
    Ok(set(pairs(rel, lim)?.into_iter().map(|(a, b)| Value::pair(b, a))))
}

/// `r[s]`.
pub fn image(rel: &Value, s: &Value, lim: &Limits) -> EvalResult<Value> {
    let mut out = BTreeSet::new();
    for (a, b) in pairs(rel, lim)? {
        if contains(s, &a, lim)? {
            out.insert(b);
        }
    }
    Ok(Value::Set(Arc::new(out)))
}

/// Forward composition `(r1 ; r2)`.
pub fn composition(r1: &Value, r2: &Value, lim: &Limits) -> EvalResult<Value> {
    let mut by_first: BTreeMap<Value, Vec<Value>> = BTreeMap::new();
    for (b, c) in pairs(r2, lim)? {
        by_first.entry(b).or_default().push(c);
    }
    let mut out = BTreeSet::new();
    for (a, b) in pairs(r1, lim)? {
        for c in by_first.get(&b).into_iter().flatten() {
            out.insert(Value::pair(a.clone(), c.clone()));
        }
    }
    Ok(Value::Set(Arc::new(out)))
}

/// `r1 <+ r2`.
pub fn override_relation(r1: &Value, r2: &Value, lim: &Limits) -> EvalResult<Value> {
    let p2 = pairs(r2, lim)?;
    let dom2: BTreeSet<&Value> = p2.iter().map(|(a, _)| a).collect();
    let mut out: BTreeSet<Value> = pairs(r1, lim)?
        .into_iter()
        .filter(|(a, _)| !dom2.contains(a))
        .map(|(a, b)| Value::pair(a, b))
        .collect();
    out.extend(p2.iter().map(|(a, b)| Value::pair(a.clone(), b.clone())));
    Ok(Value::Set(Arc::new(out)))
}

fn filter_pairs(
    rel: &Value,
    lim: &Limits,
    mut keep: impl FnMut(&Value, &Value) -> EvalResult<bool>,
) -> EvalResult<Value> {
    let mut out = BTreeSet::new();
    for (a, b) in pairs(rel, lim)? {
        if keep(&a, &b)? {
            out.insert(Value::pair(a, b));
        }
    }
    Ok(Value::Set(Arc::new(out)))
}

/// `s <| r`.
pub fn domain_restrict(s: &Value, rel: &Value, lim: &Limits) -> EvalResult<Value> {
    filter_pairs(rel, lim, |a, _| contains(s, a, lim))
}

/// `s <<| r`.
pub fn domain_subtract(s: &Value, rel: &Value, lim: &Limits) -> EvalResult<Value> {
    filter_pairs(rel, lim, |a, _| Ok(!contains(s, a, lim)?))
}

/// `r |> s`.
pub fn range_restrict(rel: &Value, s: &Value, lim: &Limits) -> EvalResult<Value> {
    filter_pairs(rel, lim, |_, b| contains(s, b, lim))
}

/// `r |>> s`.
pub fn range_subtract(rel: &Value, s: &Value, lim: &Limits) -> EvalResult<Value> {
    filter_pairs(rel, lim, |_, b| Ok(!contains(s, b, lim)?))
}

/// `f(x)`: the unique image of `x`.
pub fn apply_function(f: &Value, x: &Value, lim: &Limits) -> EvalResult<Value> {
    let x = super::canonical(x, lim)?;
    let mut found: Option<Value> = None;
    for p in reify(f, lim)?.iter() {
        let (a, b) = p.as_pair()?;
        if *a == x {
            if found.is_some() {
                return Err(EvalError::wd(
                    WdKind::NotAFunction,
                    format!("{x} has more than one image"),
                ));
            }
            found = Some(b.clone());
        }
    }
    found.ok_or_else(|| EvalError::wd(WdKind::ApplicationOutsideDomain, format!("{x} is not in the domain")))
}

/// `f : dom <kind> ran`, checking functionality, totality, injectivity and
/// surjectivity as the arrow demands. A finite `f` is never total onto or
/// surjective onto an infinite set.
pub fn is_member_of_function_class(
    f: &Value,
    kind: FunctionKind,
    dom: &Value,
    ran: &Value,
    lim: &Limits,
) -> EvalResult<bool> {
    if !is_finite(f) {
        return Err(EvalError::Enumeration(format!("{f} as a function")));
    }
    let ps = pairs(f, lim)?;
    let mut images: BTreeMap<&Value, &Value> = BTreeMap::new();
    for (a, b) in &ps {
        if images.insert(a, b).is_some_and(|old| old != b) {
            return Ok(false);
        }
        if !contains(dom, a, lim)? || !contains(ran, b, lim)? {
            return Ok(false);
        }
    }
    if kind.is_injective() {
        let distinct: BTreeSet<&Value> = images.values().copied().collect();
        if distinct.len() != images.len() {
            return Ok(false);
        }
    }
    // Domain and range of f lie inside dom and ran, so counting suffices.
    if kind.is_total() && (!is_finite(dom) || card(dom, lim)? != images.len().into()) {
        return Ok(false);
    }
    if kind.is_surjective() {
        let distinct: BTreeSet<&Value> = images.values().copied().collect();
        if !is_finite(ran) || card(ran, lim)? != distinct.len().into() {
            return Ok(false);
        }
    }
    Ok(true)
}
