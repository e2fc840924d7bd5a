//! Shared generators and an independent reference evaluator.
//!
//! The reference evaluator works on its own small AST over `i64` and
//! `BTreeSet<i64>` and shares no code with the library. Generated formulas
//! are rendered fully parenthesised and handed to the library as text.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use bcheck::error::EvalError;
use bcheck::interp::eval_predicate;
use bcheck::state::{Environment, EvalConfig};
use bcheck::syntax::parse_predicate;
use bcheck::typing::{infer, TypeContext};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn fixture(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap()
}

/// Non-comment lines of a corpus file.
pub fn corpus(name: &str) -> Vec<String> {
    fixture(name)
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with("//"))
        .map(str::to_owned)
        .collect()
}

#[derive(Debug, Clone)]
pub enum IExpr {
    Lit(i64),
    Var(usize),
    Add(Box<IExpr>, Box<IExpr>),
    Sub(Box<IExpr>, Box<IExpr>),
    Mul(Box<IExpr>, Box<IExpr>),
    Neg(Box<IExpr>),
    /// Division by a nonzero literal, truncating toward zero.
    Div(Box<IExpr>, i64),
    Card(Box<SExpr>),
}

#[derive(Debug, Clone)]
pub enum SExpr {
    Ext(Vec<IExpr>),
    Interval(Box<IExpr>, Box<IExpr>),
    Union(Box<SExpr>, Box<SExpr>),
    Inter(Box<SExpr>, Box<SExpr>),
    Diff(Box<SExpr>, Box<SExpr>),
    Var(usize),
}

#[derive(Debug, Clone)]
pub enum Pred {
    Eq(IExpr, IExpr),
    Lt(IExpr, IExpr),
    Le(IExpr, IExpr),
    In(IExpr, SExpr),
    SetEq(SExpr, SExpr),
    Subset(SExpr, SExpr),
    Not(Box<Pred>),
    And(Box<Pred>, Box<Pred>),
    Or(Box<Pred>, Box<Pred>),
    Implies(Box<Pred>, Box<Pred>),
    Equiv(Box<Pred>, Box<Pred>),
    /// `#x.(x : D & P)` over an integer variable.
    ExistsInt(usize, SExpr, Box<Pred>),
    /// `!x.(x : D => P)`.
    ForallInt(usize, SExpr, Box<Pred>),
    /// `#s.(s <: D & P)` over a set variable.
    ExistsSet(usize, SExpr, Box<Pred>),
}

// ---------------------------------------------------------------------
// Rendering

pub fn ivar(i: usize) -> String {
    format!("xi{i}")
}

pub fn svar(i: usize) -> String {
    format!("ss{i}")
}

pub fn render_i(e: &IExpr) -> String {
    match e {
        IExpr::Lit(n) if *n < 0 => format!("(-{})", -n),
        IExpr::Lit(n) => n.to_string(),
        IExpr::Var(i) => ivar(*i),
        IExpr::Add(a, b) => format!("({} + {})", render_i(a), render_i(b)),
        IExpr::Sub(a, b) => format!("({} - {})", render_i(a), render_i(b)),
        IExpr::Mul(a, b) => format!("({} * {})", render_i(a), render_i(b)),
        IExpr::Neg(a) => format!("(-{})", render_i(a)),
        IExpr::Div(a, k) if *k < 0 => format!("({} / (-{}))", render_i(a), -k),
        IExpr::Div(a, k) => format!("({} / {k})", render_i(a)),
        IExpr::Card(s) => format!("card({})", render_s(s)),
    }
}

pub fn render_s(e: &SExpr) -> String {
    match e {
        SExpr::Ext(xs) => format!("{{{}}}", xs.iter().map(render_i).collect::<Vec<_>>().join(", ")),
        SExpr::Interval(a, b) => format!("({} .. {})", render_i(a), render_i(b)),
        SExpr::Union(a, b) => format!("({} \\/ {})", render_s(a), render_s(b)),
        SExpr::Inter(a, b) => format!("({} /\\ {})", render_s(a), render_s(b)),
        SExpr::Diff(a, b) => format!("({} - {})", render_s(a), render_s(b)),
        SExpr::Var(i) => svar(*i),
    }
}

pub fn render_p(p: &Pred) -> String {
    match p {
        Pred::Eq(a, b) => format!("({} = {})", render_i(a), render_i(b)),
        Pred::Lt(a, b) => format!("({} < {})", render_i(a), render_i(b)),
        Pred::Le(a, b) => format!("({} <= {})", render_i(a), render_i(b)),
        Pred::In(a, s) => format!("({} : {})", render_i(a), render_s(s)),
        Pred::SetEq(a, b) => format!("({} = {})", render_s(a), render_s(b)),
        Pred::Subset(a, b) => format!("({} <: {})", render_s(a), render_s(b)),
        Pred::Not(a) => format!("not({})", render_p(a)),
        Pred::And(a, b) => format!("({} & {})", render_p(a), render_p(b)),
        Pred::Or(a, b) => format!("({} or {})", render_p(a), render_p(b)),
        Pred::Implies(a, b) => format!("({} => {})", render_p(a), render_p(b)),
        Pred::Equiv(a, b) => format!("({} <=> {})", render_p(a), render_p(b)),
        Pred::ExistsInt(v, d, b) => format!("#{x}.({x} : {} & {})", render_s(d), render_p(b), x = ivar(*v)),
        Pred::ForallInt(v, d, b) => format!("!{x}.({x} : {} => {})", render_s(d), render_p(b), x = ivar(*v)),
        Pred::ExistsSet(v, d, b) => format!("#{x}.({x} <: {} & {})", render_s(d), render_p(b), x = svar(*v)),
    }
}

// ---------------------------------------------------------------------
// Reference evaluation

#[derive(Debug, Default, Clone)]
pub struct Env {
    ints: BTreeMap<usize, i64>,
    sets: BTreeMap<usize, BTreeSet<i64>>,
}

pub fn ref_i(e: &IExpr, env: &Env) -> i64 {
    match e {
        IExpr::Lit(n) => *n,
        IExpr::Var(i) => env.ints[i],
        IExpr::Add(a, b) => ref_i(a, env) + ref_i(b, env),
        IExpr::Sub(a, b) => ref_i(a, env) - ref_i(b, env),
        IExpr::Mul(a, b) => ref_i(a, env) * ref_i(b, env),
        IExpr::Neg(a) => -ref_i(a, env),
        IExpr::Div(a, k) => ref_i(a, env) / k,
        IExpr::Card(s) => ref_s(s, env).len() as i64,
    }
}

pub fn ref_s(e: &SExpr, env: &Env) -> BTreeSet<i64> {
    match e {
        SExpr::Ext(xs) => xs.iter().map(|x| ref_i(x, env)).collect(),
        SExpr::Interval(a, b) => (ref_i(a, env)..=ref_i(b, env)).collect(),
        SExpr::Union(a, b) => ref_s(a, env).union(&ref_s(b, env)).copied().collect(),
        SExpr::Inter(a, b) => ref_s(a, env).intersection(&ref_s(b, env)).copied().collect(),
        SExpr::Diff(a, b) => ref_s(a, env).difference(&ref_s(b, env)).copied().collect(),
        SExpr::Var(i) => env.sets[i].clone(),
    }
}

fn subsets(base: &BTreeSet<i64>) -> Vec<BTreeSet<i64>> {
    let items: Vec<i64> = base.iter().copied().collect();
    (0u32..(1 << items.len()))
        .map(|mask| {
            items
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, x)| *x)
                .collect()
        })
        .collect()
}

pub fn ref_p(p: &Pred, env: &Env) -> bool {
    match p {
        Pred::Eq(a, b) => ref_i(a, env) == ref_i(b, env),
        Pred::Lt(a, b) => ref_i(a, env) < ref_i(b, env),
        Pred::Le(a, b) => ref_i(a, env) <= ref_i(b, env),
        Pred::In(a, s) => ref_s(s, env).contains(&ref_i(a, env)),
        Pred::SetEq(a, b) => ref_s(a, env) == ref_s(b, env),
        Pred::Subset(a, b) => ref_s(a, env).is_subset(&ref_s(b, env)),
        Pred::Not(a) => !ref_p(a, env),
        Pred::And(a, b) => ref_p(a, env) && ref_p(b, env),
        Pred::Or(a, b) => ref_p(a, env) || ref_p(b, env),
        Pred::Implies(a, b) => !ref_p(a, env) || ref_p(b, env),
        Pred::Equiv(a, b) => ref_p(a, env) == ref_p(b, env),
        Pred::ExistsInt(v, d, b) => ref_s(d, env).into_iter().any(|x| {
            let mut inner = env.clone();
            inner.ints.insert(*v, x);
            ref_p(b, &inner)
        }),
        Pred::ForallInt(v, d, b) => ref_s(d, env).into_iter().all(|x| {
            let mut inner = env.clone();
            inner.ints.insert(*v, x);
            ref_p(b, &inner)
        }),
        Pred::ExistsSet(v, d, b) => subsets(&ref_s(d, env)).into_iter().any(|s| {
            let mut inner = env.clone();
            inner.sets.insert(*v, s);
            ref_p(b, &inner)
        }),
    }
}

// ---------------------------------------------------------------------
// Generation

/// Random closed predicates. Quantified domains have at most four
/// elements.
pub struct Gen<'r, R: Rng> {
    pub rng: &'r mut R,
    ints: Vec<usize>,
    sets: Vec<usize>,
    next: usize,
}

impl<'r, R: Rng> Gen<'r, R> {
    pub fn new(rng: &'r mut R) -> Self {
        Self {
            rng,
            ints: Vec::new(),
            sets: Vec::new(),
            next: 0,
        }
    }

    fn lit(&mut self) -> IExpr {
        IExpr::Lit(self.rng.gen_range(-3..=5))
    }

    pub fn int(&mut self, depth: u32) -> IExpr {
        let leaf = depth == 0 || self.rng.gen_bool(0.35);
        if leaf {
            return match (self.ints.is_empty(), self.rng.gen_range(0..3)) {
                (false, 0 | 1) => IExpr::Var(*self.ints.choose(self.rng).unwrap()),
                _ => self.lit(),
            };
        }
        let d = depth - 1;
        match self.rng.gen_range(0..7) {
            0 => IExpr::Add(Box::new(self.int(d)), Box::new(self.int(d))),
            1 => IExpr::Sub(Box::new(self.int(d)), Box::new(self.int(d))),
            2 => IExpr::Mul(Box::new(self.int(d)), Box::new(self.int(d))),
            3 => IExpr::Neg(Box::new(self.int(d))),
            4 => {
                let k = *[-3i64, -2, 2, 3].choose(self.rng).unwrap();
                IExpr::Div(Box::new(self.int(d)), k)
            }
            _ => IExpr::Card(Box::new(self.set(d))),
        }
    }

    /// A set of at most four elements built from literals and variables.
    pub fn domain(&mut self) -> SExpr {
        if self.rng.gen_bool(0.5) {
            let lo = self.rng.gen_range(-2..=3);
            let len = self.rng.gen_range(0..=3);
            SExpr::Interval(Box::new(IExpr::Lit(lo)), Box::new(IExpr::Lit(lo + len)))
        } else {
            let n = self.rng.gen_range(1..=4);
            let xs = (0..n)
                .map(|_| match (self.ints.is_empty(), self.rng.gen_bool(0.3)) {
                    (false, true) => IExpr::Var(*self.ints.choose(self.rng).unwrap()),
                    _ => self.lit(),
                })
                .collect();
            SExpr::Ext(xs)
        }
    }

    pub fn set(&mut self, depth: u32) -> SExpr {
        let leaf = depth == 0 || self.rng.gen_bool(0.4);
        if leaf {
            return match (self.sets.is_empty(), self.rng.gen_range(0..3)) {
                (false, 0) => SExpr::Var(*self.sets.choose(self.rng).unwrap()),
                _ => self.domain(),
            };
        }
        let d = depth - 1;
        match self.rng.gen_range(0..3) {
            0 => SExpr::Union(Box::new(self.set(d)), Box::new(self.set(d))),
            1 => SExpr::Inter(Box::new(self.set(d)), Box::new(self.set(d))),
            _ => SExpr::Diff(Box::new(self.set(d)), Box::new(self.set(d))),
        }
    }

    pub fn pred(&mut self, depth: u32) -> Pred {
        let leaf = depth == 0 || self.rng.gen_bool(0.25);
        if leaf {
            let d = depth.min(2);
            return match self.rng.gen_range(0..6) {
                0 => Pred::Eq(self.int(d), self.int(d)),
                1 => Pred::Lt(self.int(d), self.int(d)),
                2 => Pred::Le(self.int(d), self.int(d)),
                3 => Pred::In(self.int(d), self.set(d)),
                4 => Pred::SetEq(self.set(d), self.set(d)),
                _ => Pred::Subset(self.set(d), self.set(d)),
            };
        }
        let d = depth - 1;
        match self.rng.gen_range(0..9) {
            0 => Pred::Not(Box::new(self.pred(d))),
            1 => Pred::And(Box::new(self.pred(d)), Box::new(self.pred(d))),
            2 => Pred::Or(Box::new(self.pred(d)), Box::new(self.pred(d))),
            3 => Pred::Implies(Box::new(self.pred(d)), Box::new(self.pred(d))),
            4 => Pred::Equiv(Box::new(self.pred(d)), Box::new(self.pred(d))),
            5 | 6 => {
                let dom = self.domain();
                let v = self.bind_int();
                let body = Box::new(self.pred(d));
                self.ints.pop();
                if self.rng.gen_bool(0.5) {
                    Pred::ExistsInt(v, dom, body)
                } else {
                    Pred::ForallInt(v, dom, body)
                }
            }
            7 => {
                let dom = self.domain();
                let v = self.next;
                self.next += 1;
                self.sets.push(v);
                let body = Box::new(self.pred(d));
                self.sets.pop();
                Pred::ExistsSet(v, dom, body)
            }
            _ => Pred::In(self.int(d), self.set(d)),
        }
    }

    /// Fresh integer variable pushed into scope; the caller pops it.
    pub fn bind_int(&mut self) -> usize {
        let v = self.next;
        self.next += 1;
        self.ints.push(v);
        v
    }

    pub fn unbind_int(&mut self) {
        self.ints.pop();
    }
}

/// Parse, type and evaluate `text` with the library.
pub fn library_eval(text: &str, config: &EvalConfig) -> Result<bool, String> {
    let mut unit = parse_predicate(text).map_err(|e| e.to_string())?;
    infer(&mut unit, &mut TypeContext::new()).map_err(|e| e.to_string())?;
    let mut env = Environment::new(config.clone());
    eval_predicate(&unit.root, &mut env).map_err(|e: EvalError| e.to_string())
}

// ---------------------------------------------------------------------
// Typed conjunctions

/// Conjunct templates over integer (`I`), set (`S`), boolean (`P`) and
/// relation (`R`) placeholders.
const TEMPLATES: &[&str] = &[
    "I = I + 1",
    "I : S",
    "S = S \\/ {I}",
    "S <: NAT",
    "P = bool(I < I)",
    "R : S <-> S",
    "(I |-> I) : R",
    "card(S) = I",
    "dom(R) = S",
    "P = TRUE",
    "S * S = R",
    "I * I = I",
    "R[S] <: S",
    "I - I = I",
    "S - S = S",
    "P = bool(S = {})",
];

const INTS: &[&str] = &["a", "b", "c"];
const SETS: &[&str] = &["s", "t"];
const BOOLS: &[&str] = &["p", "q"];
const RELS: &[&str] = &["r"];

/// Conjuncts of a random conjunction of two to six templates.
pub fn typed_conjuncts<R: Rng>(rng: &mut R) -> Vec<String> {
    let n = rng.gen_range(2..=6);
    (0..n)
        .map(|_| {
            let t = TEMPLATES.choose(rng).unwrap();
            let mut out = String::new();
            for ch in t.chars() {
                let pool = match ch {
                    'I' => INTS,
                    'S' => SETS,
                    'P' => BOOLS,
                    'R' => RELS,
                    _ => {
                        out.push(ch);
                        continue;
                    }
                };
                out.push_str(pool.choose(rng).unwrap());
            }
            out
        })
        .collect()
}

/// Inferred identifier types as text, or the error text.
pub fn type_map(conjuncts: &[String]) -> Result<BTreeMap<String, String>, String> {
    let text = conjuncts.iter().map(|c| format!("({c})")).collect::<Vec<_>>().join(" & ");
    let mut unit = parse_predicate(&text).map_err(|e| e.to_string())?;
    let types = infer(&mut unit, &mut TypeContext::new()).map_err(|e| e.to_string())?;
    Ok(types.into_iter().map(|(k, v)| (k, v.to_string())).collect())
}
