//! Acceptance criteria, one report line each. Runs without the libtest
//! harness; the process fails if any criterion fails.

mod common;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use bcheck::animate::{
    check_invariant, exec_substitution, initialise, load_machine, machine_environment, InvariantVerdict,
};
use bcheck::interp::eval_expression;
use bcheck::state::{Environment, EvalConfig, State};
use bcheck::syntax::{
    parse_expression, parse_predicate, parse_substitution, pretty_print, Kind, UnitKind,
};
use bcheck::typing::{infer, TypeContext};
use bcheck::validate::{check_state, load_state_text, Claim, VerdictOutcome};
use bcheck::values::{self as v, Limits, Value};
use common::*;
use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn eval_text(src: &str) -> Result<Value, String> {
    let mut unit = parse_expression(src).map_err(|e| e.to_string())?;
    infer(&mut unit, &mut TypeContext::new()).map_err(|e| e.to_string())?;
    let mut env = Environment::new(EvalConfig::default());
    eval_expression(&unit.root, &mut env).map_err(|e| e.to_string())
}

fn lambda_reproduction() -> Outcome {
    let start = Instant::now();
    let got = eval_text("%x.(x>0 & x<4|x*x)")?;
    let elapsed = start.elapsed();
    let expected = Value::set_of((1..=3).map(|i| Value::pair(Value::int(i), Value::int(i * i))));
    ensure(got == expected, || format!("got {got}"))?;
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("{got} in {elapsed:?}"))
}

fn ast_shape() -> Outcome {
    let unit = parse_predicate("1+1=x").map_err(|e| e.to_string())?;
    ensure(unit.kind == UnitKind::Predicate, || "not a predicate unit".into())?;
    let eq = &unit.root;
    ensure(eq.kind == Kind::Equal && eq.children.len() == 2, || format!("root {:?}", eq.kind))?;
    let (add, x) = (&eq.children[0], &eq.children[1]);
    ensure(add.kind == Kind::Add && add.children.len() == 2, || format!("left {:?}", add.kind))?;
    let one = Kind::Integer(BigInt::from(1));
    ensure(add.children.iter().all(|c| c.kind == one && c.children.is_empty()), || {
        "operands are not the literal 1".into()
    })?;
    ensure(x.identifier_name() == Some("x") && x.children.is_empty(), || "right is not x".into())?;
    // The parse unit itself is the sixth node.
    let nodes = 1 + eq.size();
    ensure(nodes == 6, || format!("{nodes} nodes"))?;
    Ok("unit > = > (+ > 1, 1), x".into())
}

fn typing_order_independence() -> Outcome {
    let mut unit = parse_predicate("x=y+1").map_err(|e| e.to_string())?;
    let types = infer(&mut unit, &mut TypeContext::new()).map_err(|e| e.to_string())?;
    let int = |n: &str| types.get(n).map(ToString::to_string) == Some("INTEGER".into());
    ensure(int("x") && int("y"), || format!("{types:?}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut typed, mut tries) = (0, 0);
    while typed < 500 {
        tries += 1;
        ensure(tries < 20_000, || format!("only {typed} well-typed cases generated"))?;
        let conjuncts = typed_conjuncts(&mut rng);
        let Ok(reference) = type_map(&conjuncts) else { continue };
        typed += 1;
        for _ in 0..3 {
            let mut shuffled = conjuncts.clone();
            shuffled.shuffle(&mut rng);
            let again = type_map(&shuffled);
            ensure(again.as_ref() == Ok(&reference), || {
                format!("{conjuncts:?} vs {shuffled:?}: {reference:?} / {again:?}")
            })?;
        }
    }
    Ok(format!("x,y : INTEGER; {typed} conjunctions x 3 permutations"))
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let config = EvalConfig::default();
    let mut truths = 0;
    for case in 0..1500 {
        let p = Gen::new(&mut rng).pred(4);
        let text = render_p(&p);
        let expected = ref_p(&p, &Env::default());
        let got = library_eval(&text, &config).map_err(|e| format!("case {case} `{text}`: {e}"))?;
        ensure(got == expected, || format!("case {case} `{text}`: {got} vs oracle {expected}"))?;
        truths += usize::from(got);
    }
    Ok(format!("1500 predicates ({truths} true) in {:?}", start.elapsed()))
}

fn power_set() -> Outcome {
    let lim = Limits::default();
    for n in 0..=16i64 {
        let base = Value::interval(BigInt::from(1), BigInt::from(n));
        let pow = eval_text(&format!("POW(1..{n})"))?;
        let card = v::card(&pow, &lim).map_err(|e| e.to_string())?;
        ensure(card == BigInt::from(1u64 << n), || format!("card(POW(1..{n})) = {card}"))?;
        if n <= 10 {
            let reified = v::reify(&pow, &lim).map_err(|e| e.to_string())?;
            ensure(reified.len() == 1 << n, || format!("{} subsets of 1..{n}", reified.len()))?;
            ensure(reified.iter().all(|s| v::is_subset(s, &base, &lim).unwrap_or(false)), || {
                "element outside POW".into()
            })?;
        }
    }
    let start = Instant::now();
    let pow18 = eval_text("POW(1..18)")?;
    let all = v::reify(&pow18, &lim).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(all.len() == 262_144, || format!("{} subsets", all.len()))?;
    ensure(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!("2^n exact for n <= 16; POW(1..18) built in {elapsed:?}"))
}

fn branch_counts() -> Outcome {
    let m = load_machine("MACHINE B VARIABLES x INVARIANT x : INTEGER INITIALISATION x := 0 END")
        .map_err(|e| e.to_string())?;
    let mut env = machine_environment(m, EvalConfig::default());
    let root = State::new(BTreeMap::new(), BTreeMap::from([("x".to_owned(), Value::int(0))]));
    let count = |src: String, env: &mut Environment| -> Result<usize, String> {
        let machine = env.machine().unwrap().clone();
        let mut unit = parse_substitution(&src).map_err(|e| e.to_string())?;
        infer(&mut unit, &mut TypeContext::for_machine(&machine)).map_err(|e| e.to_string())?;
        Ok(exec_substitution(&unit.root, env, &root).map_err(|e| e.to_string())?.len())
    };
    for k in 1..=6 {
        let arms: Vec<String> = (1..=k).map(|i| format!("x := {i}")).collect();
        let got = count(format!("CHOICE {} END", arms.join(" OR ")), &mut env)?;
        ensure(got == k, || format!("CHOICE with {k} arms gave {got}"))?;
        let got = count(format!("ANY z WHERE z : 1..{k} THEN x := z END"), &mut env)?;
        ensure(got == k, || format!("ANY over 1..{k} gave {got}"))?;
    }
    Ok("k and m successors for k, m in 1..6".into())
}

fn alstom_fault() -> Outcome {
    let verdict = |name: &str| -> Result<InvariantVerdict, String> {
        let m = load_machine(&fixture(name)).map_err(|e| e.to_string())?;
        let mut env = machine_environment(m, EvalConfig::default());
        let roots = initialise(&mut env).map_err(|e| e.to_string())?;
        check_invariant(&mut env, &roots[0].state).map_err(|e| e.to_string())
    };
    let fault = verdict("alstom_fault.mch")?;
    ensure(matches!(fault, InvariantVerdict::Violation(_)), || format!("fault: {fault}"))?;
    let fixed = verdict("alstom_fixed.mch")?;
    ensure(fixed == InvariantVerdict::Ok, || format!("fixed: {fixed}"))?;
    Ok(format!("+->> {fault}; +-> {fixed}"))
}

fn double_check() -> Outcome {
    let m = load_machine(&fixture("cruise.mch")).map_err(|e| e.to_string())?;
    let mut env = machine_environment(m, EvalConfig::default());
    let text = fixture("cruise_state.txt");
    ensure(text.contains("#PREDICATE"), || "missing marker".into())?;
    let s = load_state_text(&text, &mut env).map_err(|e| e.to_string())?;
    let v = check_state(&mut env, &s, Some(Claim::Ok));
    ensure(v.outcome == VerdictOutcome::Agree, || v.report())?;
    let mutated = text.replace("NumberOfSetCruise = 0", "NumberOfSetCruise = 1");
    let bad = load_state_text(&mutated, &mut env).map_err(|e| e.to_string())?;
    let v = check_state(&mut env, &bad, Some(Claim::Ok));
    ensure(v.outcome == VerdictOutcome::Disagree, || v.report())?;
    let failed = v.failed();
    ensure(failed.len() == 1 && failed[0].contains("NumberOfSetCruise = 0"), || {
        format!("failed conjuncts {failed:?}")
    })?;
    Ok(format!("AGREE; mutation gives DISAGREE on `{}`", failed[0]))
}

fn random_value<R: Rng>(ty: &str, rng: &mut R) -> Value {
    let elem = |set: &str, names: &[&str], rng: &mut R| {
        let i = rng.gen_range(0..names.len());
        Value::Elem(v::Element {
            set: set.into(),
            index: i,
            name: names[i].into(),
        })
    };
    match ty {
        "i" => Value::int(rng.gen_range(-50..=50)),
        "b" => Value::Bool(rng.gen()),
        "s" if rng.gen_bool(0.2) => {
            let lo = rng.gen_range(-5..5);
            Value::set_of((lo..lo + rng.gen_range(33..60)).map(Value::int))
        }
        "s" => Value::set_of((0..rng.gen_range(0..6)).map(|_| Value::int(rng.gen_range(-9..9)))),
        "e" => elem("COL", &["red", "green", "blue"], rng),
        "d" => elem("D", &["D1", "D2"], rng),
        "f" => {
            let picks: Vec<(bool, bool)> = (0..3).map(|_| (rng.gen(), rng.gen())).collect();
            Value::set_of(
                [("red", 0), ("green", 1), ("blue", 2)]
                    .into_iter()
                    .zip(picks)
                    .filter(|(_, (keep, _))| *keep)
                    .map(|((n, i), (_, b))| {
                        let k = Value::Elem(v::Element {
                            set: "COL".into(),
                            index: i,
                            name: n.into(),
                        });
                        Value::pair(k, Value::Bool(b))
                    }),
            )
        }
        "q" => v::make_sequence((0..rng.gen_range(0..5)).map(|_| Value::int(rng.gen_range(0..4)))),
        "str" => Value::Str(format!("w{}", rng.gen_range(0..100))),
        "pr" => Value::pair(Value::int(rng.gen_range(-3..3)), elem("COL", &["red", "green", "blue"], rng)),
        "ss" => Value::set_of((0..rng.gen_range(0..4)).map(|_| {
            Value::set_of((0..rng.gen_range(0..3)).map(|_| Value::int(rng.gen_range(0..3))))
        })),
        other => unreachable!("{other}"),
    }
}

const ROUND_TRIP: &str = "MACHINE RoundTrip
SETS COL = {red, green, blue}; D
CONSTANTS k
PROPERTIES k : INTEGER
VARIABLES i, b, s, e, d, f, q, str, pr, ss
INVARIANT i : INTEGER & b : BOOL & s : POW(INTEGER) & e : COL & d : D & f : COL +-> BOOL &
  q : seq(INTEGER) & str : STRING & pr : INTEGER * COL & ss : POW(POW(INTEGER))
INITIALISATION i, b, s, e, f, q, str, pr, ss := 0, TRUE, {}, red, {}, [], \"\", (0 |-> red), {} || d :: D
END";

fn round_trips() -> Outcome {
    let mut printed = 0;
    for line in corpus("corpus.txt") {
        let first = bcheck::syntax::parse_formula(&line).map_err(|e| format!("`{line}`: {e}"))?;
        let text = pretty_print(&first.root);
        let again = bcheck::syntax::parse_formula(&text).map_err(|e| format!("`{text}`: {e}"))?;
        ensure(first.root.same_shape(&again.root), || format!("`{line}` reprinted as `{text}`"))?;
        printed += 1;
    }
    for line in corpus("corpus_substitutions.txt") {
        let first = parse_substitution(&line).map_err(|e| format!("`{line}`: {e}"))?;
        let text = pretty_print(&first.root);
        let again = parse_substitution(&text).map_err(|e| format!("`{text}`: {e}"))?;
        ensure(first.root.same_shape(&again.root), || format!("`{line}` reprinted as `{text}`"))?;
        printed += 1;
    }
    for name in ["cruise.mch", "scheduler.mch", "alstom_fault.mch", "alstom_fixed.mch"] {
        let m = bcheck::syntax::parse_machine(&fixture(name)).map_err(|e| format!("{name}: {e}"))?;
        let text = bcheck::syntax::pretty_print_machine(&m);
        let again = bcheck::syntax::parse_machine(&text).map_err(|e| format!("{name} reprinted: {e}"))?;
        ensure(bcheck::syntax::pretty_print_machine(&again) == text, || format!("{name} not stable"))?;
        printed += 1;
    }

    let m = load_machine(ROUND_TRIP).map_err(|e| e.to_string())?;
    let mut env = machine_environment(m, EvalConfig::default());
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let names = ["i", "b", "s", "e", "d", "f", "q", "str", "pr", "ss"];
    for case in 0..200 {
        let vars = names
            .iter()
            .map(|n| (n.to_string(), random_value(n, &mut rng)))
            .collect();
        let consts = BTreeMap::from([("k".to_owned(), Value::int(rng.gen_range(-1000..1000)))]);
        let s = State::new(consts, vars);
        let text = s.to_predicate();
        let back = load_state_text(&text, &mut env).map_err(|e| format!("case {case}: {e}\n{text}"))?;
        ensure(back == s, || format!("case {case} differs in {:?}", back.differences(&s)))?;
    }
    Ok(format!("{printed} corpus entries reprinted; 200 states reloaded"))
}

fn logical_laws() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let config = EvalConfig::default();
    for case in 0..500 {
        let mut g = Gen::new(&mut rng);
        let p = render_p(&g.pred(3));
        let q = render_p(&g.pred(3));
        let dom = render_s(&g.domain());
        let v = g.bind_int();
        let body = render_p(&g.pred(2));
        g.unbind_int();
        let x = ivar(v);
        let laws = [
            (format!("not({p} & {q})"), format!("(not({p}) or not({q}))")),
            (format!("not({p} or {q})"), format!("(not({p}) & not({q}))")),
            (format!("({p} => {q})"), format!("(not({p}) or {q})")),
            (format!("({p} <=> {q})"), format!("(({p} => {q}) & ({q} => {p}))")),
            (
                format!("not(#{x}.({x} : {dom} & {body}))"),
                format!("!{x}.({x} : {dom} => not({body}))"),
            ),
            (
                format!("not(!{x}.({x} : {dom} => {body}))"),
                format!("#{x}.({x} : {dom} & not({body}))"),
            ),
        ];
        for (lhs, rhs) in laws {
            let a = library_eval(&lhs, &config).map_err(|e| format!("case {case} `{lhs}`: {e}"))?;
            let b = library_eval(&rhs, &config).map_err(|e| format!("case {case} `{rhs}`: {e}"))?;
            ensure(a == b, || format!("case {case}: `{lhs}` = {a} but `{rhs}` = {b}"))?;
        }
    }
    Ok("De Morgan, implication, equivalence and quantifier duality on 500 cases".into())
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("lambda reproduction", lambda_reproduction),
        ("AST shape of 1+1=x", ast_shape),
        ("typing order independence", typing_order_independence),
        ("oracle equivalence", oracle_equivalence),
        ("power-set law and performance", power_set),
        ("nondeterminism branch counts", branch_counts),
        ("faulty partial surjection detected", alstom_fault),
        ("double-check workflow", double_check),
        ("round trips", round_trips),
        ("logical laws", logical_laws),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        match result {
            Ok(detail) => println!("criterion {:>2} PASS {name} ({elapsed:.2?}): {detail}", i + 1),
            Err(why) => {
                failures += 1;
                println!("criterion {:>2} FAIL {name} ({elapsed:.2?}): {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
