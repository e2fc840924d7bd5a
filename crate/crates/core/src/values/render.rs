use std::collections::BTreeSet;

use num_bigint::BigInt;

use super::{SymbolicSet, Value};

/// Sets of more contiguous integers than this render as `lo..hi`.
const EXTENSIONAL_LIMIT: usize = 32;

/// Canonical text of a value; it parses back to an equal value.
pub fn render(v: &Value) -> String {
    let mut out = String::new();
    write_value(v, &mut out);
    out
}

fn write_value(v: &Value, out: &mut String) {
    match v {
        Value::Int(n) => out.push_str(&n.to_string()),
        Value::Bool(true) => out.push_str("TRUE"),
        Value::Bool(false) => out.push_str("FALSE"),
        Value::Str(s) => {
            out.push('"');
            out.push_str(s);
            out.push('"');
        }
        Value::Elem(e) => out.push_str(&e.name),
        Value::Pair(a, b) => {
            out.push('(');
            write_value(a, out);
            out.push_str("|->");
            write_value(b, out);
            out.push(')');
        }
        Value::Set(s) => match contiguous_range(s) {
            Some((lo, hi)) if s.len() > EXTENSIONAL_LIMIT => {
                out.push_str(&format!("{lo}..{hi}"));
            }
            _ => {
                out.push('{');
                for (i, e) in s.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    write_value(e, out);
                }
                out.push('}');
            }
        },
        Value::Symbolic(s) => write_symbolic(s, out),
    }
}

fn contiguous_range(s: &BTreeSet<Value>) -> Option<(BigInt, BigInt)> {
    let (Some(Value::Int(lo)), Some(Value::Int(hi))) = (s.first(), s.last()) else {
        return None;
    };
    let span = hi - lo + 1u32;
    (span == BigInt::from(s.len())).then(|| (lo.clone(), hi.clone()))
}

fn write_symbolic(s: &SymbolicSet, out: &mut String) {
    let binary = |op: &str, a: &Value, b: &Value, out: &mut String| {
        out.push('(');
        write_value(a, out);
        out.push_str(op);
        write_value(b, out);
        out.push(')');
    };
    match s {
        SymbolicSet::Interval(lo, hi) => out.push_str(&format!("{lo}..{hi}")),
        SymbolicSet::Natural => out.push_str("NATURAL"),
        SymbolicSet::Natural1 => out.push_str("NATURAL1"),
        SymbolicSet::Integer => out.push_str("INTEGER"),
        SymbolicSet::Strings => out.push_str("STRING"),
        SymbolicSet::PowerSet { base, nonempty } => {
            out.push_str(if *nonempty { "POW1(" } else { "POW(" });
            write_value(base, out);
            out.push(')');
        }
        SymbolicSet::Cartesian(a, b) => binary("*", a, b, out),
        SymbolicSet::Relations(a, b) => binary("<->", a, b, out),
        SymbolicSet::Functions(k, a, b) => binary(k.symbol(), a, b, out),
        SymbolicSet::Sequences { base, nonempty } => {
            out.push_str(if *nonempty { "seq1(" } else { "seq(" });
            write_value(base, out);
            out.push(')');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalars_and_pairs() {
        assert_eq!(render(&Value::int(-3)), "-3");
        assert_eq!(render(&Value::pair(Value::int(1), Value::Bool(true))), "(1|->TRUE)");
        assert_eq!(render(&Value::empty_set()), "{}");
    }

    #[test]
    fn intervals() {
        let small = Value::interval(1.into(), 3.into());
        assert_eq!(render(&small), "{1,2,3}");
        let mid = Value::interval(0.into(), 40.into());
        assert_eq!(render(&mid), "0..40");
        let big = Value::interval(0.into(), 100_000.into());
        assert_eq!(render(&big), "0..100000");
    }
}
