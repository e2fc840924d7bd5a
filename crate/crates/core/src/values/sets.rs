//! Set operations over extensional and symbolic sets.
//!
//! Shortcuts applied before reification:
//!
//! | operation | operands | result |
//! |---|---|---|
//! | `a /\ b` | one side extensional | filter it by membership in the other |
//! | `a /\ b` | intervals and NATURAL/NATURAL1/INTEGER | interval or the narrower set |
//! | `a \/ b` | one side contains the other | the larger side |
//! | `a \/ b` | overlapping or adjacent intervals | one interval |
//! | `a - b` | `a` finite | filter `a` |
//! | `a - b` | `a <: b` | empty set |
//! | `card` | interval, POW, cartesian, relations | closed formula |
//!
//! Anything else on an infinite operand is an enumeration error.

use std::collections::BTreeSet;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::relations::is_member_of_function_class;
use super::sequences::as_sequence;
use super::{Limits, SymbolicSet, Value};
use crate::error::{EvalError, EvalResult, WdKind};

fn size_cap(size: impl ToString, lim: &Limits) -> EvalError {
    EvalError::SizeCapExceeded {
        size: size.to_string(),
        cap: lim.max_set_size,
    }
}

fn check_cap(size: &BigInt, lim: &Limits) -> EvalResult<()> {
    if *size > BigInt::from(lim.max_set_size) {
        Err(size_cap(size, lim))
    } else {
        Ok(())
    }
}

fn not_a_set(v: &Value) -> EvalError {
    EvalError::confusion("a set", v)
}

/// Whether the set has finitely many elements (and so can be reified).
pub fn is_finite(v: &Value) -> bool {
    match v {
        Value::Symbolic(s) => match &**s {
            SymbolicSet::Interval(..) => true,
            SymbolicSet::Natural | SymbolicSet::Natural1 | SymbolicSet::Integer | SymbolicSet::Strings => false,
            SymbolicSet::PowerSet { base, .. } => is_finite(base),
            SymbolicSet::Cartesian(a, b) | SymbolicSet::Relations(a, b) | SymbolicSet::Functions(_, a, b) => {
                is_finite(a) && is_finite(b)
            }
            SymbolicSet::Sequences { base, .. } => matches!(base, Value::Set(s) if s.is_empty()),
        },
        _ => true,
    }
}

/// Replace finite symbolic sets nested anywhere in `v` by extensional sets.
/// Sets too large to reify and infinite sets stay symbolic.
pub fn canonical(v: &Value, lim: &Limits) -> EvalResult<Value> {
    match v {
        Value::Pair(a, b) => Ok(Value::pair(canonical(a, lim)?, canonical(b, lim)?)),
        Value::Symbolic(_) if is_finite(v) => match reify(v, lim) {
            Ok(s) => Ok(Value::Set(s)),
            Err(EvalError::SizeCapExceeded { .. }) => Ok(v.clone()),
            Err(e) => Err(e),
        },
        _ => Ok(v.clone()),
    }
}

/// Elements of a finite set.
pub fn reify(v: &Value, lim: &Limits) -> EvalResult<Arc<BTreeSet<Value>>> {
    let s = match v {
        Value::Set(s) => return Ok(s.clone()),
        Value::Symbolic(s) => s,
        other => return Err(not_a_set(other)),
    };
    match &**s {
        SymbolicSet::Interval(lo, hi) => {
            check_cap(&(hi - lo + 1u32), lim)?;
            let mut out = BTreeSet::new();
            let mut i = lo.clone();
            while i <= *hi {
                out.insert(Value::Int(i.clone()));
                i += 1u32;
            }
            Ok(Arc::new(out))
        }
        SymbolicSet::Natural => Err(EvalError::Enumeration("NATURAL".into())),
        SymbolicSet::Natural1 => Err(EvalError::Enumeration("NATURAL1".into())),
        SymbolicSet::Integer => Err(EvalError::Enumeration("INTEGER".into())),
        SymbolicSet::Strings => Err(EvalError::Enumeration("STRING".into())),
        SymbolicSet::PowerSet { base, nonempty } => {
            let base = require_finite(base, lim)?;
            let all = power_set_of(&base, lim)?;
            Ok(Arc::new(if *nonempty { without_empty(all) } else { all }))
        }
        SymbolicSet::Cartesian(a, b) => {
            let a = require_finite(a, lim)?;
            let b = require_finite(b, lim)?;
            Ok(Arc::new(cartesian_of(&a, &b, lim)?))
        }
        SymbolicSet::Relations(a, b) => {
            let a = require_finite(a, lim)?;
            let b = require_finite(b, lim)?;
            let prod = cartesian_of(&a, &b, lim)?;
            Ok(Arc::new(power_set_of(&prod, lim)?))
        }
        SymbolicSet::Functions(kind, a, b) => {
            let da = require_finite(a, lim)?;
            let rb = require_finite(b, lim)?;
            let options = BigInt::from(rb.len()) + if kind.is_total() { 0u32 } else { 1u32 };
            let count = num_traits::pow::Pow::pow(&options, da.len() as u32);
            check_cap(&count, lim)?;
            let dom: Vec<&Value> = da.iter().collect();
            let ran: Vec<&Value> = rb.iter().collect();
            let radix = options.to_usize().unwrap_or(0);
            let mut out = BTreeSet::new();
            if radix == 0 {
                if dom.is_empty() {
                    out.insert(Value::empty_set());
                }
                return Ok(Arc::new(out));
            }
            // Odometer over choices; with a partial kind, digit `ran.len()` means unmapped.
            let mut digits = vec![0usize; dom.len()];
            loop {
                let f: BTreeSet<Value> = dom
                    .iter()
                    .zip(&digits)
                    .filter(|(_, d)| **d < ran.len())
                    .map(|(x, d)| Value::pair((*x).clone(), ran[*d].clone()))
                    .collect();
                let f = Value::Set(Arc::new(f));
                if is_member_of_function_class(&f, *kind, a, b, lim)? {
                    out.insert(f);
                }
                let mut i = 0;
                loop {
                    if i == digits.len() {
                        return Ok(Arc::new(out));
                    }
                    digits[i] += 1;
                    if digits[i] < radix {
                        break;
                    }
                    digits[i] = 0;
                    i += 1;
                }
            }
        }
        SymbolicSet::Sequences { base, nonempty } => {
            if is_finite(v) {
                let mut out = BTreeSet::new();
                if !*nonempty {
                    out.insert(Value::empty_set());
                }
                Ok(Arc::new(out))
            } else {
                let _ = base;
                Err(EvalError::Enumeration(super::render(v)))
            }
        }
    }
}

fn require_finite(v: &Value, lim: &Limits) -> EvalResult<Arc<BTreeSet<Value>>> {
    reify(v, lim)
}

fn without_empty(mut s: BTreeSet<Value>) -> BTreeSet<Value> {
    s.remove(&Value::empty_set());
    s
}

fn power_set_of(base: &BTreeSet<Value>, lim: &Limits) -> EvalResult<BTreeSet<Value>> {
    let n = base.len();
    if n >= 63 || (1usize << n) > lim.max_set_size {
        return Err(size_cap(BigInt::one() << n, lim));
    }
    let items: Vec<&Value> = base.iter().collect();
    let mut out = BTreeSet::new();
    for mask in 0u64..(1u64 << n) {
        let subset: BTreeSet<Value> = items
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, v)| (*v).clone())
            .collect();
        out.insert(Value::Set(Arc::new(subset)));
    }
    Ok(out)
}

fn cartesian_of(a: &BTreeSet<Value>, b: &BTreeSet<Value>, lim: &Limits) -> EvalResult<BTreeSet<Value>> {
    check_cap(&(BigInt::from(a.len()) * b.len()), lim)?;
    let mut out = BTreeSet::new();
    for x in a {
        for y in b {
            out.insert(Value::pair(x.clone(), y.clone()));
        }
    }
    Ok(out)
}

/// `POW(a)` built extensionally.
pub fn power_set(a: &Value, lim: &Limits) -> EvalResult<Value> {
    Ok(Value::Set(Arc::new(power_set_of(&*reify(a, lim)?, lim)?)))
}

/// `POW1(a)` built extensionally.
pub fn power_set1(a: &Value, lim: &Limits) -> EvalResult<Value> {
    Ok(Value::Set(Arc::new(without_empty(power_set_of(&*reify(a, lim)?, lim)?))))
}

/// `a * b` built extensionally.
pub fn cartesian(a: &Value, b: &Value, lim: &Limits) -> EvalResult<Value> {
    Ok(Value::Set(Arc::new(cartesian_of(&*reify(a, lim)?, &*reify(b, lim)?, lim)?)))
}

/// `a * b`: extensional when both sides are extensional and the product fits,
/// symbolic otherwise.
pub fn product(a: &Value, b: &Value, lim: &Limits) -> EvalResult<Value> {
    if let (Value::Set(x), Value::Set(y)) = (a, b) {
        if x.len().saturating_mul(y.len()) <= lim.max_set_size {
            return Ok(Value::Set(Arc::new(cartesian_of(x, y, lim)?)));
        }
    }
    Ok(Value::symbolic(SymbolicSet::Cartesian(a.clone(), b.clone())))
}

fn interval_bounds(v: &Value) -> Option<(Option<BigInt>, Option<BigInt>)> {
    match v {
        Value::Symbolic(s) => match &**s {
            SymbolicSet::Interval(lo, hi) => Some((Some(lo.clone()), Some(hi.clone()))),
            SymbolicSet::Natural => Some((Some(BigInt::zero()), None)),
            SymbolicSet::Natural1 => Some((Some(BigInt::one()), None)),
            SymbolicSet::Integer => Some((None, None)),
            _ => None,
        },
        _ => None,
    }
}

fn from_bounds(lo: Option<BigInt>, hi: Option<BigInt>) -> Value {
    match (lo, hi) {
        (Some(lo), Some(hi)) => Value::interval(lo, hi),
        (None, None) => Value::symbolic(SymbolicSet::Integer),
        (Some(lo), None) if lo.is_zero() => Value::symbolic(SymbolicSet::Natural),
        (Some(lo), None) if lo.is_one() => Value::symbolic(SymbolicSet::Natural1),
        // Other half-bounded sets have no closed form here.
        _ => unreachable!("half-bounded interval"),
    }
}

/// Membership `x : set`.
pub fn contains(set: &Value, x: &Value, lim: &Limits) -> EvalResult<bool> {
    match set {
        Value::Set(s) => {
            if has_symbolic(x) {
                let x = canonical(x, lim)?;
                Ok(s.contains(&x))
            } else {
                Ok(s.contains(x))
            }
        }
        Value::Symbolic(sym) => match &**sym {
            SymbolicSet::Interval(lo, hi) => Ok(matches!(x, Value::Int(n) if lo <= n && n <= hi)),
            SymbolicSet::Natural => Ok(matches!(x, Value::Int(n) if !n.is_negative())),
            SymbolicSet::Natural1 => Ok(matches!(x, Value::Int(n) if *n >= BigInt::one())),
            SymbolicSet::Integer => Ok(matches!(x, Value::Int(_))),
            SymbolicSet::Strings => Ok(matches!(x, Value::Str(_))),
            SymbolicSet::PowerSet { base, nonempty } => {
                if *nonempty && is_empty(x, lim)? {
                    return Ok(false);
                }
                is_subset(x, base, lim)
            }
            SymbolicSet::Cartesian(a, b) => {
                let (l, r) = x.as_pair()?;
                Ok(contains(a, l, lim)? && contains(b, r, lim)?)
            }
            SymbolicSet::Relations(a, b) => {
                for p in reify(x, lim)?.iter() {
                    let (l, r) = p.as_pair()?;
                    if !contains(a, l, lim)? || !contains(b, r, lim)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            SymbolicSet::Functions(kind, a, b) => is_member_of_function_class(x, *kind, a, b, lim),
            SymbolicSet::Sequences { base, nonempty } => {
                let items = match as_sequence(x, lim) {
                    Ok(items) => items,
                    Err(EvalError::WellDefinedness {
                        kind: WdKind::NotASequence,
                        ..
                    }) => return Ok(false),
                    Err(e) => return Err(e),
                };
                if *nonempty && items.is_empty() {
                    return Ok(false);
                }
                for item in &items {
                    if !contains(base, item, lim)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
        },
        other => Err(not_a_set(other)),
    }
}

fn has_symbolic(v: &Value) -> bool {
    match v {
        Value::Symbolic(_) => true,
        Value::Pair(a, b) => has_symbolic(a) || has_symbolic(b),
        _ => false,
    }
}

/// Number of elements.
pub fn card(v: &Value, lim: &Limits) -> EvalResult<BigInt> {
    let s = match v {
        Value::Set(s) => return Ok(BigInt::from(s.len())),
        Value::Symbolic(s) => s,
        other => return Err(not_a_set(other)),
    };
    let two_pow = |n: BigInt| -> EvalResult<BigInt> {
        let n = n
            .to_u32()
            .filter(|n| *n < (1 << 24))
            .ok_or_else(|| size_cap(format!("2^{n}"), lim))?;
        Ok(BigInt::one() << n)
    };
    match &**s {
        SymbolicSet::Interval(lo, hi) => Ok(hi - lo + 1u32),
        SymbolicSet::PowerSet { base, nonempty } if is_finite(base) => {
            let all = two_pow(card(base, lim)?)?;
            Ok(if *nonempty { all - 1u32 } else { all })
        }
        SymbolicSet::Cartesian(a, b) if is_finite(v) => Ok(card(a, lim)? * card(b, lim)?),
        SymbolicSet::Relations(a, b) if is_finite(v) => two_pow(card(a, lim)? * card(b, lim)?),
        _ if is_finite(v) => Ok(BigInt::from(reify(v, lim)?.len())),
        _ => Err(EvalError::Enumeration(format!("card({})", super::render(v)))),
    }
}

/// True when the set has no elements.
pub fn is_empty(v: &Value, lim: &Limits) -> EvalResult<bool> {
    match v {
        Value::Set(s) => Ok(s.is_empty()),
        Value::Symbolic(s) => match &**s {
            SymbolicSet::Interval(..)
            | SymbolicSet::Natural
            | SymbolicSet::Natural1
            | SymbolicSet::Integer
            | SymbolicSet::Strings
            | SymbolicSet::Relations(..) => Ok(false),
            SymbolicSet::PowerSet { base, nonempty } => Ok(*nonempty && is_empty(base, lim)?),
            SymbolicSet::Cartesian(a, b) => Ok(is_empty(a, lim)? || is_empty(b, lim)?),
            SymbolicSet::Sequences { base, nonempty } => Ok(*nonempty && is_empty(base, lim)?),
            SymbolicSet::Functions(..) if is_finite(v) => Ok(reify(v, lim)?.is_empty()),
            // A function set with an infinite side always contains a finite partial map
            // or is reified by the caller; only total kinds over infinite domains can be empty.
            SymbolicSet::Functions(kind, a, b) => Ok(kind.is_total() && !is_empty(a, lim)? && is_empty(b, lim)?),
        },
        other => Err(not_a_set(other)),
    }
}

/// B equality on values.
pub fn equal(a: &Value, b: &Value, lim: &Limits) -> EvalResult<bool> {
    match (a, b) {
        (Value::Pair(a1, a2), Value::Pair(b1, b2)) => Ok(equal(a1, b1, lim)? && equal(a2, b2, lim)?),
        (Value::Set(_), Value::Set(_)) => Ok(a == b),
        (Value::Symbolic(x), Value::Symbolic(y)) if x == y => Ok(true),
        (Value::Symbolic(_), _) | (_, Value::Symbolic(_)) => {
            if let (Some(x), Some(y)) = (interval_bounds(a), interval_bounds(b)) {
                return Ok(x == y);
            }
            match (is_finite(a), is_finite(b)) {
                (true, true) => {
                    if card(a, lim)? != card(b, lim)? {
                        return Ok(false);
                    }
                    is_subset(a, b, lim)
                }
                (false, false) => Ok(is_subset(a, b, lim)? && is_subset(b, a, lim)?),
                _ => Ok(false),
            }
        }
        _ => Ok(a == b),
    }
}

/// `a <: b`.
pub fn is_subset(a: &Value, b: &Value, lim: &Limits) -> EvalResult<bool> {
    if let (Some((alo, ahi)), Some((blo, bhi))) = (interval_bounds(a), interval_bounds(b)) {
        let lower_ok = match (&alo, &blo) {
            (_, None) => true,
            (None, Some(_)) => false,
            (Some(x), Some(y)) => x >= y,
        };
        let upper_ok = match (&ahi, &bhi) {
            (_, None) => true,
            (None, Some(_)) => false,
            (Some(x), Some(y)) => x <= y,
        };
        return Ok(lower_ok && upper_ok);
    }
    if is_finite(a) {
        if let Value::Symbolic(s) = a {
            if let SymbolicSet::Interval(lo, hi) = &**s {
                if let Value::Set(bs) = b {
                    // An interval larger than an extensional set cannot fit in it.
                    if hi - lo + 1u32 > BigInt::from(bs.len()) {
                        return Ok(false);
                    }
                }
            }
        }
        for x in reify(a, lim)?.iter() {
            if !contains(b, x, lim)? {
                return Ok(false);
            }
        }
        return Ok(true);
    }
    if is_finite(b) {
        return Ok(false);
    }
    if let (Value::Symbolic(x), Value::Symbolic(y)) = (a, b) {
        match (&**x, &**y) {
            (SymbolicSet::Strings, SymbolicSet::Strings) => return Ok(true),
            (SymbolicSet::Strings, _) | (_, SymbolicSet::Strings) => return Ok(false),
            (
                SymbolicSet::PowerSet { base: p, nonempty: ne1 },
                SymbolicSet::PowerSet { base: q, nonempty: ne2 },
            ) => return Ok((*ne1 || !*ne2) && is_subset(p, q, lim)?),
            (SymbolicSet::Cartesian(a1, a2), SymbolicSet::Cartesian(b1, b2)) => {
                return Ok(is_subset(a1, b1, lim)? && is_subset(a2, b2, lim)?);
            }
            _ if x == y => return Ok(true),
            _ => {}
        }
    }
    Err(EvalError::Enumeration(format!(
        "{} <: {}",
        super::render(a),
        super::render(b)
    )))
}

/// `a <<: b`.
pub fn is_strict_subset(a: &Value, b: &Value, lim: &Limits) -> EvalResult<bool> {
    Ok(is_subset(a, b, lim)? && !equal(a, b, lim)?)
}

fn collect(items: BTreeSet<Value>, lim: &Limits) -> EvalResult<Value> {
    check_cap(&BigInt::from(items.len()), lim)?;
    Ok(Value::Set(Arc::new(items)))
}

/// `a \/ b`.
pub fn union(a: &Value, b: &Value, lim: &Limits) -> EvalResult<Value> {
    if let (Value::Set(x), Value::Set(y)) = (a, b) {
        let (big, small) = if x.len() >= y.len() { (x, y) } else { (y, x) };
        if small.is_empty() {
            return Ok(Value::Set(big.clone()));
        }
        let mut out = (**big).clone();
        out.extend(small.iter().cloned());
        return collect(out, lim);
    }
    if let (Some((alo, ahi)), Some((blo, bhi))) = (interval_bounds(a), interval_bounds(b)) {
        let touches = match (&ahi, &blo, &bhi, &alo) {
            (Some(ah), Some(bl), Some(bh), Some(al)) => *bl <= ah + 1u32 && *al <= bh + 1u32,
            _ => true,
        };
        if touches {
            let lo = match (alo, blo) {
                (Some(x), Some(y)) => Some(x.min(y)),
                _ => None,
            };
            let hi = match (ahi, bhi) {
                (Some(x), Some(y)) => Some(x.max(y)),
                _ => None,
            };
            if hi.is_some() || lo.as_ref().is_none_or(|l| l.is_zero() || l.is_one()) {
                return Ok(from_bounds(lo, hi));
            }
        }
    }
    if is_finite(a) && is_finite(b) {
        let mut out = (*reify(a, lim)?).clone();
        out.extend(reify(b, lim)?.iter().cloned());
        return collect(out, lim);
    }
    if is_subset(b, a, lim)? {
        return Ok(a.clone());
    }
    if is_subset(a, b, lim)? {
        return Ok(b.clone());
    }
    Err(EvalError::Enumeration(format!("{} \\/ {}", super::render(a), super::render(b))))
}

/// `a /\ b`.
pub fn inter(a: &Value, b: &Value, lim: &Limits) -> EvalResult<Value> {
    let filter = |set: &BTreeSet<Value>, other: &Value| -> EvalResult<Value> {
        let mut out = BTreeSet::new();
        for x in set {
            if contains(other, x, lim)? {
                out.insert(x.clone());
            }
        }
        Ok(Value::Set(Arc::new(out)))
    };
    match (a, b) {
        (Value::Set(x), _) => return filter(x, b),
        (_, Value::Set(y)) => return filter(y, a),
        _ => {}
    }
    if let (Some((alo, ahi)), Some((blo, bhi))) = (interval_bounds(a), interval_bounds(b)) {
        let lo = match (alo, blo) {
            (Some(x), Some(y)) => Some(x.max(y)),
            (x, y) => x.or(y),
        };
        let hi = match (ahi, bhi) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, y) => x.or(y),
        };
        return Ok(from_bounds(lo, hi));
    }
    if is_finite(a) {
        return filter(&*reify(a, lim)?, b);
    }
    if is_finite(b) {
        return filter(&*reify(b, lim)?, a);
    }
    if is_subset(a, b, lim)? {
        return Ok(a.clone());
    }
    if is_subset(b, a, lim)? {
        return Ok(b.clone());
    }
    Err(EvalError::Enumeration(format!("{} /\\ {}", super::render(a), super::render(b))))
}

/// `a - b` on sets.
pub fn diff(a: &Value, b: &Value, lim: &Limits) -> EvalResult<Value> {
    if let Value::Set(y) = b {
        if y.is_empty() {
            return canonical(a, lim);
        }
    }
    if is_finite(a) {
        let mut out = BTreeSet::new();
        for x in reify(a, lim)?.iter() {
            if !contains(b, x, lim)? {
                out.insert(x.clone());
            }
        }
        return Ok(Value::Set(Arc::new(out)));
    }
    if !is_finite(b) && is_subset(a, b, lim)? {
        return Ok(Value::empty_set());
    }
    Err(EvalError::Enumeration(format!("{} - {}", super::render(a), super::render(b))))
}

/// Binary minus: integer subtraction or set difference by runtime variant.
pub fn subtract_overloaded(a: &Value, b: &Value, lim: &Limits) -> EvalResult<Value> {
    match (a, b) {
        (Value::Int(x), Value::Int(y)) => Ok(Value::Int(x - y)),
        _ if a.is_set() && b.is_set() => diff(a, b, lim),
        _ => Err(EvalError::TypeConfusion {
            expected: "two integers or two sets".into(),
            found: format!("{a} and {b}"),
        }),
    }
}

/// Least element of a set of integers.
pub fn min(v: &Value, lim: &Limits) -> EvalResult<BigInt> {
    extremum(v, lim, true)
}

/// Greatest element of a set of integers.
pub fn max(v: &Value, lim: &Limits) -> EvalResult<BigInt> {
    extremum(v, lim, false)
}

fn extremum(v: &Value, lim: &Limits, least: bool) -> EvalResult<BigInt> {
    if let Some((lo, hi)) = interval_bounds(v) {
        return match if least { lo } else { hi } {
            Some(n) => Ok(n),
            None => Err(EvalError::Enumeration(format!(
                "{}({})",
                if least { "min" } else { "max" },
                super::render(v)
            ))),
        };
    }
    let s = reify(v, lim)?;
    let pick = if least { s.first() } else { s.last() };
    match pick {
        Some(x) => Ok(x.as_int()?.clone()),
        None => Err(EvalError::wd(
            WdKind::EmptyMinMax,
            format!("{}({{}})", if least { "min" } else { "max" }),
        )),
    }
}
