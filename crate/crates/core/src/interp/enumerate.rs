//! Type-directed candidate enumeration.
//!
//! Order: integers `0, 1, -1, 2, -2, ...`; `FALSE` before `TRUE`; set
//! elements in declaration order; pairs row-major; subsets by size, then
//! lexicographically by their elements in this same order.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};

use crate::error::{EvalError, EvalResult};
use crate::state::Environment;
use crate::typing::BType;
use crate::values::Value;

/// Total order used for candidates and witnesses.
pub fn enum_cmp(a: &Value, b: &Value) -> Ordering {
    match (a, b) {
        (Value::Int(x), Value::Int(y)) => (x.abs(), x.is_negative()).cmp(&(y.abs(), y.is_negative())),
        (Value::Pair(a1, a2), Value::Pair(b1, b2)) => enum_cmp(a1, b1).then_with(|| enum_cmp(a2, b2)),
        (Value::Set(x), Value::Set(y)) => x.len().cmp(&y.len()).then_with(|| {
            let mut xs: Vec<&Value> = x.iter().collect();
            let mut ys: Vec<&Value> = y.iter().collect();
            xs.sort_by(|p, q| enum_cmp(p, q));
            ys.sort_by(|p, q| enum_cmp(p, q));
            xs.iter()
                .zip(&ys)
                .map(|(p, q)| enum_cmp(p, q))
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
        }),
        _ => a.cmp(b),
    }
}

/// Sort candidates into enumeration order.
pub fn sort_candidates(values: &mut [Value]) {
    values.sort_by(enum_cmp);
}

/// Number of values of a type under the configured bounds.
pub fn type_size(t: &BType, env: &Environment) -> EvalResult<BigInt> {
    let cfg = env.config();
    match t {
        BType::Integer => Ok(&cfg.maxint - &cfg.minint + 1u32),
        BType::Bool => Ok(BigInt::from(2)),
        BType::String => Err(EvalError::Enumeration("STRING".into())),
        BType::Given(name) | BType::Deferred(name) => env
            .set_elements(name)
            .map(|e| BigInt::from(e.len()))
            .ok_or_else(|| EvalError::UnknownIdentifier(name.clone())),
        BType::Set(e) => {
            let n = type_size(e, env)?;
            match n.to_u32().filter(|n| *n < 1 << 20) {
                Some(n) => Ok(BigInt::from(1) << n),
                None => Err(EvalError::BudgetExceeded(cfg.max_enum)),
            }
        }
        BType::Pair(a, b) => Ok(type_size(a, env)? * type_size(b, env)?),
        BType::Var(_) => Err(EvalError::confusion("a resolved type", t)),
    }
}

/// All values of `t` in enumeration order, within the candidate budget.
pub fn enumerate_type(t: &BType, env: &Environment) -> EvalResult<Vec<Value>> {
    let budget = env.config().max_enum;
    if type_size(t, env)? > BigInt::from(budget) {
        return Err(EvalError::BudgetExceeded(budget));
    }
    Ok(generate(t, env))
}

fn generate(t: &BType, env: &Environment) -> Vec<Value> {
    let cfg = env.config();
    match t {
        BType::Integer => {
            let mut out = Vec::new();
            let reach = cfg.maxint.clone().max(-cfg.minint.clone());
            let mut k = BigInt::from(0);
            while k <= reach {
                if k <= cfg.maxint {
                    out.push(Value::Int(k.clone()));
                }
                let neg = -k.clone();
                if k.is_positive() && neg >= cfg.minint {
                    out.push(Value::Int(neg));
                }
                k += 1u32;
            }
            out
        }
        BType::Bool => vec![Value::Bool(false), Value::Bool(true)],
        BType::Given(name) | BType::Deferred(name) => env.set_elements(name).unwrap_or_default().to_vec(),
        BType::Set(e) => {
            let items = generate(e, env);
            let n = items.len();
            let mut out: Vec<Value> = (0u64..(1u64 << n))
                .map(|mask| {
                    Value::set_of(
                        items
                            .iter()
                            .enumerate()
                            .filter(|(i, _)| mask & (1 << i) != 0)
                            .map(|(_, v)| v.clone()),
                    )
                })
                .collect();
            sort_candidates(&mut out);
            out
        }
        BType::Pair(a, b) => {
            let left = generate(a, env);
            let right = generate(b, env);
            let mut out = Vec::with_capacity(left.len() * right.len());
            for x in &left {
                for y in &right {
                    out.push(Value::pair(x.clone(), y.clone()));
                }
            }
            out
        }
        BType::String | BType::Var(_) => Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::EvalConfig;

    #[test]
    fn bool_and_sets_of_bool() {
        let env = Environment::new(EvalConfig::default());
        assert_eq!(
            enumerate_type(&BType::Bool, &env).unwrap(),
            vec![Value::Bool(false), Value::Bool(true)]
        );
        let subsets = enumerate_type(&BType::set(BType::Bool), &env).unwrap();
        assert_eq!(
            subsets,
            vec![
                Value::empty_set(),
                Value::set_of([Value::Bool(false)]),
                Value::set_of([Value::Bool(true)]),
                Value::set_of([Value::Bool(false), Value::Bool(true)]),
            ]
        );
    }

    #[test]
    fn integer_order() {
        let cfg = EvalConfig {
            minint: BigInt::from(-1),
            maxint: BigInt::from(1),
            ..EvalConfig::default()
        };
        let env = Environment::new(cfg);
        assert_eq!(
            enumerate_type(&BType::Integer, &env).unwrap(),
            vec![Value::int(0), Value::int(1), Value::int(-1)]
        );
    }

    #[test]
    fn string_and_budget() {
        let env = Environment::new(EvalConfig::default());
        assert!(matches!(enumerate_type(&BType::String, &env), Err(EvalError::Enumeration(_))));
        assert!(matches!(
            enumerate_type(&BType::set(BType::Integer), &env),
            Err(EvalError::BudgetExceeded(_))
        ));
    }
}
