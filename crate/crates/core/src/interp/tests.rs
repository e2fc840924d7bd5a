use super::*;
use crate::error::{EvalError, WdKind};
use crate::state::{Environment, EvalConfig};
use crate::syntax::{parse_expression, parse_predicate};
use crate::typing::{infer, TypeContext};
use crate::values::{render, Value};

fn env() -> Environment {
    Environment::new(EvalConfig::default())
}

fn expr(src: &str, env: &mut Environment) -> Result<Value, EvalError> {
    let mut unit = parse_expression(src).unwrap();
    infer(&mut unit, &mut TypeContext::new()).unwrap();
    let depth = env.depth();
    let out = eval_expression(&unit.root, env);
    assert_eq!(env.depth(), depth, "frames leaked by {src}");
    out
}

fn pred(src: &str, env: &mut Environment) -> Result<bool, EvalError> {
    let mut unit = parse_predicate(src).unwrap();
    infer(&mut unit, &mut TypeContext::new()).unwrap();
    let depth = env.depth();
    let out = eval_predicate(&unit.root, env);
    assert_eq!(env.depth(), depth, "frames leaked by {src}");
    out
}

fn shown(src: &str) -> String {
    render(&expr(src, &mut env()).unwrap())
}

#[test]
fn lambda_and_comprehension() {
    assert_eq!(shown("%x.(x>0 & x<4|x*x)"), "{(1|->1),(2|->4),(3|->9)}");
    assert_eq!(shown("{x | x:1..4 & x mod 2 = 0}"), "{2,4}");
    assert_eq!(shown("card(POW(1..3))"), "8");
}

#[test]
fn quantifiers() {
    assert!(pred("#x.(x:1..10 & x*x=9)", &mut env()).unwrap());
    assert!(pred("!x.(x:1..5 => x<6)", &mut env()).unwrap());
    assert!(!pred("!x.(x:1..5 => x<5)", &mut env()).unwrap());
    assert!(pred("#(x,y).(x:1..3 & y = x+1 & y = 4)", &mut env()).unwrap());
}

#[test]
fn short_circuit_and_well_definedness() {
    assert!(!pred("FALSE = TRUE & 1/0 = 1", &mut env()).unwrap());
    assert!(matches!(
        expr("7/0", &mut env()),
        Err(EvalError::WellDefinedness { kind: WdKind::DivisionByZero, .. })
    ));
    assert!(matches!(
        pred("1/0 = 1 & 1 = 2", &mut env()),
        Err(EvalError::WellDefinedness { .. })
    ));
}

#[test]
fn unbounded_integer_search_is_refused() {
    assert!(matches!(
        pred("#x.(x:NATURAL & x>MAXINT)", &mut env()),
        Err(EvalError::Enumeration(_))
    ));
    assert!(!pred("#x.(x:NATURAL & x<0)", &mut env()).unwrap());
}

#[test]
fn narrowing_is_transparent() {
    let srcs = [
        "{x,y | x:0..5 & y:0..5 & x+y=5}",
        "{s | s <: 1..3 & card(s) = 2}",
        "{b | b : BOOL & b = TRUE}",
        "{x | x : {1,5,9} & x > 2}",
        "{p | p : BOOL*BOOL & p = (TRUE|->FALSE)}",
    ];
    for src in srcs {
        let on = expr(src, &mut env()).unwrap();
        let mut off = Environment::new(EvalConfig {
            narrowing: false,
            ..EvalConfig::default()
        });
        assert_eq!(on, expr(src, &mut off).unwrap(), "{src}");
    }
}

#[test]
fn frames_balance_on_error() {
    let mut e = env();
    let before = e.depth();
    assert!(pred("#x.(x:1..3 & 1/(x-2) = 0)", &mut e).is_err());
    assert_eq!(e.depth(), before);
}

#[test]
fn budget_is_enforced() {
    let mut e = Environment::new(EvalConfig {
        max_enum: 10,
        ..EvalConfig::default()
    });
    assert!(matches!(
        pred("#x.(x:1..100 & x*x = 10000)", &mut e),
        Err(EvalError::BudgetExceeded(10))
    ));
}
