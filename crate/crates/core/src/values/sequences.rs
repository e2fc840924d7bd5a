use std::collections::BTreeSet;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use super::sets::reify;
use super::{Limits, Value};
use crate::error::{EvalError, EvalResult, WdKind};

/// Elements of a sequence in index order. A sequence is a function whose
/// domain is exactly `1..n`.
pub fn as_sequence(v: &Value, lim: &Limits) -> EvalResult<Vec<Value>> {
    let items = reify(v, lim)?;
    let n = items.len();
    let mut slots: Vec<Option<Value>> = vec![None; n];
    for p in items.iter() {
        let not_seq = || EvalError::wd(WdKind::NotASequence, v.to_string());
        let (i, x) = p.as_pair().map_err(|_| not_seq())?;
        let i = match i {
            Value::Int(i) => i.to_usize().filter(|i| (1..=n).contains(i)).ok_or_else(not_seq)?,
            _ => return Err(not_seq()),
        };
        if slots[i - 1].replace(x.clone()).is_some() {
            return Err(not_seq());
        }
    }
    // n pairs with distinct indices in 1..n fill every slot.
    Ok(slots.into_iter().map(|s| s.expect("filled slot")).collect())
}

/// Relational encoding `{1|->x1, ..., n|->xn}`.
pub fn make_sequence(items: impl IntoIterator<Item = Value>) -> Value {
    let set: BTreeSet<Value> = items
        .into_iter()
        .enumerate()
        .map(|(i, x)| Value::pair(Value::Int(BigInt::from(i + 1)), x))
        .collect();
    Value::Set(Arc::new(set))
}

pub fn seq_size(v: &Value, lim: &Limits) -> EvalResult<BigInt> {
    Ok(BigInt::from(as_sequence(v, lim)?.len()))
}

pub fn seq_concat(a: &Value, b: &Value, lim: &Limits) -> EvalResult<Value> {
    let mut items = as_sequence(a, lim)?;
    items.extend(as_sequence(b, lim)?);
    Ok(make_sequence(items))
}

fn nonempty(v: &Value, lim: &Limits, op: &str) -> EvalResult<Vec<Value>> {
    let items = as_sequence(v, lim)?;
    if items.is_empty() {
        return Err(EvalError::wd(WdKind::EmptySequence, format!("{op}([])")));
    }
    Ok(items)
}

pub fn seq_first(v: &Value, lim: &Limits) -> EvalResult<Value> {
    Ok(nonempty(v, lim, "first")?.swap_remove(0))
}

pub fn seq_last(v: &Value, lim: &Limits) -> EvalResult<Value> {
    Ok(nonempty(v, lim, "last")?.pop().expect("nonempty"))
}

pub fn seq_front(v: &Value, lim: &Limits) -> EvalResult<Value> {
    let mut items = nonempty(v, lim, "front")?;
    items.pop();
    Ok(make_sequence(items))
}

pub fn seq_tail(v: &Value, lim: &Limits) -> EvalResult<Value> {
    let items = nonempty(v, lim, "tail")?;
    Ok(make_sequence(items.into_iter().skip(1)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lim() -> Limits {
        Limits::default()
    }

    fn seq(xs: &[i64]) -> Value {
        make_sequence(xs.iter().map(|x| Value::int(*x)))
    }

    #[test]
    fn basic_operations() {
        assert_eq!(seq_size(&seq(&[7, 8, 9]), &lim()).unwrap(), BigInt::from(3));
        assert_eq!(seq_concat(&seq(&[1, 2]), &seq(&[3]), &lim()).unwrap(), seq(&[1, 2, 3]));
        assert_eq!(seq_first(&seq(&[4, 5]), &lim()).unwrap(), Value::int(4));
        assert_eq!(seq_last(&seq(&[4, 5]), &lim()).unwrap(), Value::int(5));
        assert_eq!(seq_front(&seq(&[4, 5]), &lim()).unwrap(), seq(&[4]));
        assert_eq!(seq_tail(&seq(&[4, 5]), &lim()).unwrap(), seq(&[5]));
    }

    #[test]
    fn errors() {
        assert!(matches!(
            seq_tail(&Value::empty_set(), &lim()),
            Err(EvalError::WellDefinedness { kind: WdKind::EmptySequence, .. })
        ));
        let gap = Value::set_of([Value::pair(Value::int(2), Value::int(1))]);
        assert!(matches!(
            as_sequence(&gap, &lim()),
            Err(EvalError::WellDefinedness { kind: WdKind::NotASequence, .. })
        ));
    }
}
