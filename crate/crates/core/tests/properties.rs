//! Randomised properties over evaluation, typing, execution and validation.

mod common;

use std::collections::{BTreeMap, BTreeSet};

use bcheck::animate::{exec_substitution, load_machine, machine_environment};
use bcheck::interp::{eval_expression, eval_predicate, find_witness};
use bcheck::state::{Environment, EvalConfig, State, StateSpace};
use bcheck::syntax::{parse_expression, parse_predicate, parse_substitution, Node};
use bcheck::typing::{infer, unify, BType, TypeContext, TypeSubstitution};
use bcheck::validate::{check_state, Claim, VerdictOutcome};
use bcheck::values::{self as v, render, Value};
use common::*;
use num_bigint::BigInt;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn gen_pred(seed: u64, depth: u32) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    render_p(&Gen::new(&mut rng).pred(depth))
}

/// A quantified predicate or a comprehension-based predicate over a
/// generated domain.
fn gen_binder_formula(seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = Gen::new(&mut rng);
    let dom = render_s(&g.domain());
    let x = ivar(g.bind_int());
    let body = render_p(&g.pred(2));
    g.unbind_int();
    match seed % 3 {
        0 => format!("#{x}.({x} : {dom} & {body})"),
        1 => format!("!{x}.({x} : {dom} => {body})"),
        _ => format!("card({{{x} | {x} : {dom} & {body}}}) >= 0 & {{{x} | {x} : {dom} & {body}}} <: {dom}"),
    }
}

fn typed(text: &str) -> Node {
    let mut unit = parse_predicate(text).unwrap();
    infer(&mut unit, &mut TypeContext::new()).unwrap();
    unit.root
}

const COUNTER: &str = "MACHINE Counter
VARIABLES x, y
INVARIANT x : INTEGER & y : INTEGER
INITIALISATION x, y := 0, 0
END";

const STEPS: &[&str] = &[
    "skip",
    "x := x + 1",
    "y := x",
    "x := y || y := x",
    "CHOICE x := 0 OR x := 1 END",
    "x :: {x, y, 3}",
    "ANY z WHERE z : 0..2 THEN y := z END",
    "SELECT x > 1 THEN x := 0 WHEN y > 1 THEN y := y - 1 END",
    "IF x = y THEN x := 5 ELSE skip END",
    "PRE x < 4 THEN x := x + 2 END",
    "x : (x : 0..3 & x /= y)",
];

fn counter_env() -> Environment {
    machine_environment(load_machine(COUNTER).unwrap(), EvalConfig::default())
}

fn counter_state(x: i64, y: i64) -> State {
    let vars = BTreeMap::from([("x".to_owned(), Value::int(x)), ("y".to_owned(), Value::int(y))]);
    State::new(BTreeMap::new(), vars)
}

fn typed_substitution(env: &Environment, src: &str) -> Node {
    let machine = env.machine().unwrap().clone();
    let mut unit = parse_substitution(src).unwrap();
    let mut ctx = TypeContext::for_machine(&machine);
    ctx.assignable = Some(["x".to_owned(), "y".to_owned()].into());
    infer(&mut unit, &mut ctx).unwrap();
    unit.root
}

fn successors(env: &mut Environment, src: &str, s: &State) -> Vec<State> {
    let node = typed_substitution(env, src);
    exec_substitution(&node, env, s).unwrap().states().cloned().collect()
}

fn rendered(states: &[State]) -> BTreeSet<String> {
    states.iter().map(State::to_predicate).collect()
}

fn arb_type() -> impl Strategy<Value = BType> {
    let leaf = prop_oneof![
        Just(BType::Integer),
        Just(BType::Bool),
        Just(BType::String),
        Just(BType::Given("COL".into())),
        (0u32..6).prop_map(BType::Var),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(BType::set),
            (inner.clone(), inner).prop_map(|(a, b)| BType::pair(a, b)),
        ]
    })
}

const CRUISE_LIKE: &str = "MACHINE Guarded
VARIABLES x, y
INVARIANT x : NAT & y : -3..3 & (x > 2 => y /= 0) & 6 / y >= -6
INITIALISATION x, y := 0, 1
END";

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn narrowing_is_transparent(seed in any::<u64>()) {
        let text = gen_binder_formula(seed);
        let on = library_eval(&text, &EvalConfig::default());
        let off = library_eval(&text, &EvalConfig { narrowing: false, ..EvalConfig::default() });
        prop_assert_eq!(on, off, "{}", text);
    }

    #[test]
    fn evaluation_is_deterministic(seed in any::<u64>()) {
        let text = gen_binder_formula(seed);
        let root = typed(&text);
        let mut env = Environment::new(EvalConfig::default());
        let first = eval_predicate(&root, &mut env).map_err(|e| e.to_string());
        let second = eval_predicate(&root, &mut env).map_err(|e| e.to_string());
        prop_assert_eq!(first, second);
    }

    #[test]
    fn witnesses_are_deterministic(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut g = Gen::new(&mut rng);
        let dom = render_s(&g.domain());
        let x = ivar(g.bind_int());
        let body = render_p(&g.pred(2));
        let text = format!("{x} : {dom} & {body}");
        let root = typed(&text);
        let ids = vec![(x.clone(), BType::Integer)];
        let mut env = Environment::new(EvalConfig::default());
        let a = find_witness(&ids, &root, &mut env).map_err(|e| e.to_string());
        let b = find_witness(&ids, &root, &mut env).map_err(|e| e.to_string());
        prop_assert_eq!(a, b);
    }

    #[test]
    fn frames_balance_on_success_and_error(seed in any::<u64>(), poison in 0usize..3) {
        let p = gen_pred(seed, 3);
        let text = match poison {
            0 => p,
            1 => format!("({p}) or 1 / 0 = 1"),
            _ => format!("({p}) & card(NATURAL) > 0"),
        };
        let root = typed(&text);
        let mut env = Environment::new(EvalConfig::default());
        env.push_frame();
        let before = env.depth();
        let _ = eval_predicate(&root, &mut env);
        prop_assert_eq!(env.depth(), before, "{}", text);
    }

    #[test]
    fn interval_membership_and_cardinality(lo in -20i64..20, hi in -20i64..20, n in -25i64..25) {
        let lim = EvalConfig::default().limits();
        let iv = Value::interval(BigInt::from(lo), BigInt::from(hi));
        prop_assert_eq!(v::contains(&iv, &Value::int(n), &lim).unwrap(), lo <= n && n <= hi);
        prop_assert_eq!(v::card(&iv, &lim).unwrap(), BigInt::from((hi - lo + 1).max(0)));
    }

    #[test]
    fn unifiers_equalise_and_are_idempotent(a in arb_type(), b in arb_type()) {
        if let Ok(s) = unify(&a, &b, &TypeSubstitution::new()) {
            prop_assert_eq!(s.apply(&a), s.apply(&b));
            for t in [&a, &b] {
                let once = s.apply(t);
                prop_assert_eq!(s.apply(&once), once);
            }
            for (var, ty) in s.bindings() {
                prop_assert!(!s.apply(ty).occurs(var), "{} occurs in {}", var, ty);
            }
        }
    }

    #[test]
    fn typing_ignores_conjunct_order(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let conjuncts = typed_conjuncts(&mut rng);
        let mut reversed = conjuncts.clone();
        reversed.reverse();
        prop_assert_eq!(type_map(&conjuncts).ok(), type_map(&reversed).ok());
    }

    #[test]
    fn sequencing_composes_successor_sets(
        first in 0..STEPS.len(),
        second in 0..STEPS.len(),
        x in -1i64..4,
        y in -1i64..4,
    ) {
        let mut env = counter_env();
        let s = counter_state(x, y);
        let (t1, t2) = (STEPS[first], STEPS[second]);
        let composed = successors(&mut env, &format!("{t1}; {t2}"), &s);
        let oracle: Vec<State> = successors(&mut env, t1, &s)
            .iter()
            .flat_map(|mid| successors(&mut env, t2, mid))
            .collect();
        prop_assert_eq!(rendered(&composed), rendered(&oracle), "{}; {}", t1, t2);
        prop_assert_eq!(composed.len(), rendered(&composed).len(), "duplicate successors");
    }

    #[test]
    fn successor_order_is_stable(first in 0..STEPS.len(), second in 0..STEPS.len(), x in -1i64..4) {
        let mut env = counter_env();
        let src = format!("CHOICE {} OR {} END", STEPS[first], STEPS[second]);
        let s = counter_state(x, 1);
        let a = successors(&mut env, &src, &s);
        let b = successors(&mut env, &src, &s);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn choice_and_any_branch_counts(k in 1usize..8, m in 1usize..8) {
        let mut env = counter_env();
        let s = counter_state(0, 0);
        let arms: Vec<String> = (0..k).map(|i| format!("x := {}", i + 10)).collect();
        let choice = format!("CHOICE {} END", arms.join(" OR "));
        prop_assert_eq!(successors(&mut env, &choice, &s).len(), k);
        let any = format!("ANY z WHERE z : 1..{m} THEN y := z END");
        prop_assert_eq!(successors(&mut env, &any, &s).len(), m);
    }

    #[test]
    fn exec_keeps_frames_balanced(first in 0..STEPS.len(), x in -1i64..4, y in -1i64..4) {
        let mut env = counter_env();
        let node = typed_substitution(&env, &format!("{}; x := 1 / (y - y)", STEPS[first]));
        let before = env.depth();
        let _ = exec_substitution(&node, &mut env, &counter_state(x, y));
        prop_assert_eq!(env.depth(), before);
    }

    #[test]
    fn check_state_is_pure_and_never_masks_errors(
        x in -2i64..6,
        y in -3i64..4,
        claim in prop_oneof![Just(None), Just(Some(Claim::Ok)), Just(Some(Claim::Violation))],
    ) {
        let mut env = machine_environment(load_machine(CRUISE_LIKE).unwrap(), EvalConfig::default());
        let s = counter_state(x, y);
        let a = check_state(&mut env, &s, claim);
        let b = check_state(&mut env, &s, claim);
        prop_assert_eq!(a.report(), b.report());
        prop_assert_eq!(&a, &b);
        let errored = a.clauses.iter().any(|c| c.result == "ERROR");
        prop_assert_eq!(errored, y == 0);
        if errored {
            prop_assert_eq!(a.outcome, VerdictOutcome::Error);
        }
        match claim {
            None => prop_assert!(!matches!(a.outcome, VerdictOutcome::Agree | VerdictOutcome::Disagree)),
            Some(_) => prop_assert!(!matches!(a.outcome, VerdictOutcome::Ok | VerdictOutcome::Violation)),
        }
    }

    #[test]
    fn state_space_never_forgets(moves in proptest::collection::vec((0i64..4, any::<bool>()), 1..20)) {
        let mut space = StateSpace::new();
        let root = space.add_state(counter_state(0, 0));
        space.start_at(root);
        let mut seen = BTreeSet::new();
        for (x, back) in moves {
            let before = (space.states().len(), space.transitions().len());
            if back && space.path().len() > 1 {
                space.backtrack().unwrap();
                prop_assert_eq!((space.states().len(), space.transitions().len()), before);
            } else {
                let from = space.current().unwrap();
                let r = space.add_state(counter_state(x, 0));
                prop_assert_eq!(space.add_state(counter_state(x, 0)), r);
                space.add_transition(from, format!("set({x})"), r);
                space.visit(r);
                seen.insert(x);
            }
        }
        prop_assert!(space.states().len() <= seen.len() + 1);
    }

    #[test]
    fn canonical_rendering_reparses(xs in proptest::collection::btree_set(-50i64..50, 0..8)) {
        let set = Value::set_of(xs.iter().map(|&i| Value::pair(Value::int(i), Value::Bool(i % 2 == 0))));
        let text = render(&set);
        let mut unit = parse_expression(&text).unwrap();
        let mut ctx = TypeContext::new();
        if xs.is_empty() {
            // The empty set needs an annotation to type.
            unit = parse_expression("{} <| {(1|->TRUE)}").unwrap();
        }
        infer(&mut unit, &mut ctx).unwrap();
        let back = eval_expression(&unit.root, &mut Environment::new(EvalConfig::default())).unwrap();
        prop_assert_eq!(back, set);
    }
}
