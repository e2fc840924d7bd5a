//! Solving a predicate over quantified identifiers by enumeration.
//!
//! Identifiers are bound one at a time in declaration order. Each gets a
//! candidate domain read off the top-level conjuncts (`x : S`, `x = E`,
//! `x <: S`, integer comparisons) whose other side mentions only
//! identifiers that are already bound. After each binding, the longest
//! prefix of conjuncts that is fully bound is evaluated and failing
//! branches are pruned; evaluating only a prefix keeps left-to-right
//! short-circuit behaviour.
//!
//! An integer identifier must be bounded above and below by such conjuncts;
//! otherwise the search is refused with an enumeration error. With narrowing
//! disabled, equalities are not used, and integers range over the whole
//! bounding interval of their declared range.

use std::collections::BTreeSet;
use std::ops::ControlFlow;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::enumerate::{enumerate_type, sort_candidates};
use super::eval::{eval_expression, eval_predicate};
use crate::error::{EvalError, EvalResult};
use crate::state::Environment;
use crate::syntax::{Kind, Node};
use crate::typing::BType;
use crate::values::{self as v, SymbolicSet, Value};

/// Callback invoked with every satisfying binding in scope.
pub type SolutionFn<'f> = dyn FnMut(&mut Environment) -> EvalResult<ControlFlow<()>> + 'f;

/// Names and types of a binder's identifier list.
pub fn binders(list: &Node) -> EvalResult<Vec<(String, BType)>> {
    list.children
        .iter()
        .map(|id| {
            let name = id
                .identifier_name()
                .ok_or_else(|| EvalError::confusion("an identifier", format!("{:?}", id.kind)))?;
            let ty = id
                .ty
                .clone()
                .ok_or_else(|| EvalError::confusion("a typed identifier", name))?;
            Ok((name.to_owned(), ty))
        })
        .collect()
}

struct Search<'a> {
    ids: &'a [(String, BType)],
    conjuncts: Vec<&'a Node>,
    /// Quantified identifiers occurring free in each conjunct.
    uses: Vec<BTreeSet<usize>>,
    tried: usize,
}

/// Call `f` for every binding of `ids` that satisfies `body` (all bindings
/// when `body` is `None`), in enumeration order. The bindings live in a
/// frame that is popped before returning.
pub fn for_each_solution(
    ids: &[(String, BType)],
    body: Option<&Node>,
    env: &mut Environment,
    f: &mut SolutionFn<'_>,
) -> EvalResult<ControlFlow<()>> {
    let conjuncts = body.map(Node::conjuncts).unwrap_or_default();
    let uses = conjuncts
        .iter()
        .map(|c| {
            let free = c.free_identifiers();
            ids.iter()
                .enumerate()
                .filter(|(_, (n, _))| free.contains(n))
                .map(|(i, _)| i)
                .collect()
        })
        .collect();
    let mut search = Search {
        ids,
        conjuncts,
        uses,
        tried: 0,
    };
    env.scoped(|env| search.level(0, 0, env, f))
}

impl<'a> Search<'a> {
    fn level(
        &mut self,
        i: usize,
        next: usize,
        env: &mut Environment,
        f: &mut SolutionFn<'_>,
    ) -> EvalResult<ControlFlow<()>> {
        if i == self.ids.len() {
            for c in &self.conjuncts[next..] {
                if !eval_predicate(c, env)? {
                    return Ok(ControlFlow::Continue(()));
                }
            }
            return f(env);
        }
        let budget = env.config().max_enum;
        for candidate in self.candidates(i, env)? {
            self.tried += 1;
            if self.tried > budget {
                return Err(EvalError::BudgetExceeded(budget));
            }
            env.declare(&self.ids[i].0, candidate);
            let mut k = next;
            let mut pruned = false;
            while k < self.conjuncts.len() && self.uses[k].iter().all(|u| *u <= i) {
                if !eval_predicate(self.conjuncts[k], env)? {
                    pruned = true;
                    break;
                }
                k += 1;
            }
            if !pruned && self.level(i + 1, k, env, f)?.is_break() {
                return Ok(ControlFlow::Break(()));
            }
        }
        Ok(ControlFlow::Continue(()))
    }

    /// Whether `node` mentions none of the identifiers `i..`.
    fn closed(&self, node: &Node, i: usize) -> bool {
        let free = node.free_identifiers();
        self.ids[i..].iter().all(|(n, _)| !free.contains(n))
    }

    fn candidates(&self, i: usize, env: &mut Environment) -> EvalResult<Vec<Value>> {
        let (name, ty) = &self.ids[i];
        let lim = *env.limits();
        let is_me = |n: &Node| n.identifier_name() == Some(name.as_str());
        let mut domain: Option<Value> = None;
        let mut lo: Option<BigInt> = None;
        let mut hi: Option<BigInt> = None;
        let restrict = |d: Value, domain: &mut Option<Value>| {
            *domain = Some(match domain.take() {
                None => d,
                Some(old) => v::inter(&old, &d, &lim).unwrap_or(old),
            });
        };
        let narrowing = env.config().narrowing;
        for c in &self.conjuncts {
            if c.children.len() != 2 {
                continue;
            }
            let (l, r) = (&c.children[0], &c.children[1]);
            // Oriented so that `x` is on the left: `x op e`.
            let (op, other) = match (&c.kind, is_me(l), is_me(r)) {
                (Kind::Member | Kind::Subset | Kind::StrictSubset, true, _) => (c.kind.clone(), r),
                (Kind::Equal | Kind::Less | Kind::LessEqual | Kind::Greater | Kind::GreaterEqual, true, false) => {
                    (c.kind.clone(), r)
                }
                (Kind::Equal, false, true) => (Kind::Equal, l),
                (Kind::Less, false, true) => (Kind::Greater, l),
                (Kind::LessEqual, false, true) => (Kind::GreaterEqual, l),
                (Kind::Greater, false, true) => (Kind::Less, l),
                (Kind::GreaterEqual, false, true) => (Kind::LessEqual, l),
                _ => continue,
            };
            // Without narrowing only declared ranges and integer bounds count.
            if !self.closed(other, i) || (!narrowing && op == Kind::Equal) {
                continue;
            }
            // Narrowing is an optimisation; a failing side is simply ignored.
            let Ok(value) = eval_expression(other, env) else {
                continue;
            };
            match op {
                Kind::Member => restrict(value, &mut domain),
                Kind::Equal => match v::canonical(&value, &lim) {
                    Ok(x) => restrict(Value::set_of([x]), &mut domain),
                    Err(_) => continue,
                },
                Kind::Subset | Kind::StrictSubset => restrict(
                    Value::symbolic(SymbolicSet::PowerSet {
                        base: value,
                        nonempty: false,
                    }),
                    &mut domain,
                ),
                _ => {
                    let Value::Int(n) = value else { continue };
                    match op {
                        Kind::Less => tighten_hi(&mut hi, n - 1u32),
                        Kind::LessEqual => tighten_hi(&mut hi, n),
                        Kind::Greater => tighten_lo(&mut lo, n + 1u32),
                        _ => tighten_lo(&mut lo, n),
                    }
                }
            }
        }
        let budget = env.config().max_enum;
        let mut out = if *ty == BType::Integer {
            self.integer_candidates(name, domain, lo, hi, narrowing, budget, &lim)?
        } else {
            match domain {
                Some(d) if v::is_finite(&d) => {
                    if v::card(&d, &lim)? > BigInt::from(budget) {
                        return Err(EvalError::BudgetExceeded(budget));
                    }
                    v::reify(&d, &lim)?.iter().cloned().collect()
                }
                _ => return enumerate_type(ty, env),
            }
        };
        sort_candidates(&mut out);
        Ok(out)
    }

    #[allow(clippy::too_many_arguments)]
    fn integer_candidates(
        &self,
        name: &str,
        domain: Option<Value>,
        mut lo: Option<BigInt>,
        mut hi: Option<BigInt>,
        narrowing: bool,
        budget: usize,
        lim: &v::Limits,
    ) -> EvalResult<Vec<Value>> {
        let in_bounds = |n: &BigInt, lo: &Option<BigInt>, hi: &Option<BigInt>| {
            lo.as_ref().is_none_or(|l| n >= l) && hi.as_ref().is_none_or(|h| n <= h)
        };
        if let Some(d) = &domain {
            match d {
                Value::Symbolic(s) => match &**s {
                    SymbolicSet::Interval(a, b) => {
                        tighten_lo(&mut lo, a.clone());
                        tighten_hi(&mut hi, b.clone());
                    }
                    SymbolicSet::Natural => tighten_lo(&mut lo, BigInt::zero()),
                    SymbolicSet::Natural1 => tighten_lo(&mut lo, BigInt::one()),
                    _ => {}
                },
                Value::Set(s) => {
                    let ints: Vec<&BigInt> = s.iter().filter_map(|x| x.as_int().ok()).collect();
                    if narrowing {
                        return Ok(ints
                            .into_iter()
                            .filter(|n| in_bounds(n, &lo, &hi))
                            .map(|n| Value::Int(n.clone()))
                            .collect());
                    }
                    match (ints.first(), ints.last()) {
                        (Some(a), Some(b)) => {
                            tighten_lo(&mut lo, (*a).clone());
                            tighten_hi(&mut hi, (*b).clone());
                        }
                        _ => return Ok(Vec::new()),
                    }
                }
                _ => {}
            }
        }
        let (Some(lo), Some(hi)) = (lo, hi) else {
            return Err(EvalError::Enumeration(format!(
                "{name}: INTEGER is not bounded by the predicate"
            )));
        };
        if lo > hi {
            return Ok(Vec::new());
        }
        if &hi - &lo + 1u32 > BigInt::from(budget) {
            return Err(EvalError::BudgetExceeded(budget));
        }
        let mut out = Vec::new();
        let mut n = lo;
        while n <= hi {
            let x = Value::Int(n.clone());
            let keep = match (&domain, narrowing) {
                (Some(d), true) => v::contains(d, &x, lim)?,
                _ => true,
            };
            if keep {
                out.push(x);
            }
            n += 1u32;
        }
        Ok(out)
    }
}

fn tighten_lo(lo: &mut Option<BigInt>, n: BigInt) {
    if lo.as_ref().is_none_or(|l| n > *l) {
        *lo = Some(n);
    }
}

fn tighten_hi(hi: &mut Option<BigInt>, n: BigInt) {
    if hi.as_ref().is_none_or(|h| n < *h) {
        *hi = Some(n);
    }
}

/// First binding of `ids` satisfying `body` in enumeration order.
pub fn find_witness(
    ids: &[(String, BType)],
    body: &Node,
    env: &mut Environment,
) -> EvalResult<Option<Vec<(String, Value)>>> {
    let mut witness = None;
    let _ = for_each_solution(ids, Some(body), env, &mut |env| {
        let values = ids
            .iter()
            .map(|(n, _)| Ok((n.clone(), env.lookup(n)?.clone())))
            .collect::<EvalResult<Vec<_>>>()?;
        witness = Some(values);
        Ok(ControlFlow::Break(()))
    })?;
    Ok(witness)
}
