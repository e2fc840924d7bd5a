//! Runtime values and the set, relation, function and sequence algebra.
//!
//! Finite sets are `Arc<BTreeSet<Value>>` in the derived (canonical) order.
//! Large or infinite sets stay symbolic and support membership; they are
//! reified only when an operation needs their elements and the result fits
//! under [`Limits::max_set_size`].

mod relations;
mod render;
mod sequences;
mod sets;

use std::collections::BTreeSet;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use crate::error::{EvalError, EvalResult};
use crate::syntax::FunctionKind;

pub use relations::{
    apply_function, composition, domain, domain_restrict, domain_subtract, image, inverse,
    is_member_of_function_class, override_relation, pairs, range, range_restrict, range_subtract,
};
pub use render::render;
pub use sequences::{
    as_sequence, make_sequence, seq_concat, seq_first, seq_front, seq_last, seq_size, seq_tail,
};
pub use sets::{
    canonical, card, cartesian, contains, diff, equal, inter, is_empty, is_finite, is_strict_subset,
    is_subset, max, min, power_set, power_set1, product, reify, subtract_overloaded, union,
};

/// Intervals up to this many elements are stored extensionally.
pub const EAGER_INTERVAL_LIMIT: u64 = 4096;

/// Resource caps for set construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_set_size: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            max_set_size: 1 << 20,
        }
    }
}

/// Element of an enumerated or deferred set. Ordered by declaration index.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Element {
    pub set: Arc<str>,
    pub index: usize,
    pub name: Arc<str>,
}

/// A B value. Derived equality is structural and only meaningful between
/// values in [`canonical`] form; use [`equal`] for B equality.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Int(BigInt),
    Bool(bool),
    Str(String),
    Elem(Element),
    Pair(Box<Value>, Box<Value>),
    Set(Arc<BTreeSet<Value>>),
    Symbolic(Arc<SymbolicSet>),
}

/// Sets kept in closed form.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SymbolicSet {
    /// `lo..hi` with `lo <= hi` and more than [`EAGER_INTERVAL_LIMIT`] elements.
    Interval(BigInt, BigInt),
    Natural,
    Natural1,
    Integer,
    Strings,
    PowerSet { base: Value, nonempty: bool },
    Cartesian(Value, Value),
    Relations(Value, Value),
    Functions(FunctionKind, Value, Value),
    Sequences { base: Value, nonempty: bool },
}

impl Value {
    pub fn int(n: i64) -> Value {
        Value::Int(BigInt::from(n))
    }

    pub fn pair(a: Value, b: Value) -> Value {
        Value::Pair(Box::new(a), Box::new(b))
    }

    /// Left-nested tuple `((a,b),c)`.
    pub fn tuple(items: Vec<Value>) -> Value {
        let mut it = items.into_iter();
        let first = it.next().expect("empty tuple");
        it.fold(first, Value::pair)
    }

    pub fn empty_set() -> Value {
        Value::Set(Arc::new(BTreeSet::new()))
    }

    /// Set of values that are already canonical.
    pub fn set_of(items: impl IntoIterator<Item = Value>) -> Value {
        Value::Set(Arc::new(items.into_iter().collect()))
    }

    pub fn symbolic(s: SymbolicSet) -> Value {
        Value::Symbolic(Arc::new(s))
    }

    /// `lo..hi`: extensional when small, symbolic otherwise.
    pub fn interval(lo: BigInt, hi: BigInt) -> Value {
        if lo > hi {
            return Value::empty_set();
        }
        let size = &hi - &lo + 1u32;
        match size.to_u64() {
            Some(n) if n <= EAGER_INTERVAL_LIMIT => {
                let mut set = BTreeSet::new();
                let mut i = lo;
                while i <= hi {
                    set.insert(Value::Int(i.clone()));
                    i += 1u32;
                }
                Value::Set(Arc::new(set))
            }
            _ => Value::symbolic(SymbolicSet::Interval(lo, hi)),
        }
    }

    pub fn as_int(&self) -> EvalResult<&BigInt> {
        match self {
            Value::Int(n) => Ok(n),
            other => Err(EvalError::confusion("an integer", other)),
        }
    }

    pub fn as_bool(&self) -> EvalResult<bool> {
        match self {
            Value::Bool(b) => Ok(*b),
            other => Err(EvalError::confusion("a boolean", other)),
        }
    }

    pub fn as_pair(&self) -> EvalResult<(&Value, &Value)> {
        match self {
            Value::Pair(a, b) => Ok((a, b)),
            other => Err(EvalError::confusion("a pair", other)),
        }
    }

    pub fn is_set(&self) -> bool {
        matches!(self, Value::Set(_) | Value::Symbolic(_))
    }

    /// Elements of an extensional set, without reification.
    pub fn as_finite_set(&self) -> Option<&BTreeSet<Value>> {
        match self {
            Value::Set(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Value::Int(n) if n.is_zero())
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Bool(b)
    }
}

impl From<i64> for Value {
    fn from(n: i64) -> Self {
        Value::int(n)
    }
}

impl From<BigInt> for Value {
    fn from(n: BigInt) -> Self {
        Value::Int(n)
    }
}

impl std::fmt::Display for Value {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&render(self))
    }
}
