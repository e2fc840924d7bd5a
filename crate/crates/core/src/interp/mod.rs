//! Evaluation of expressions and predicates over an environment.

mod enumerate;
mod eval;
mod solve;

pub use enumerate::{enum_cmp, enumerate_type, sort_candidates, type_size};
pub use eval::{eval_comprehension, eval_expression, eval_lambda, eval_predicate, eval_quantifier};
pub use solve::{binders, find_witness, for_each_solution, SolutionFn};

#[cfg(test)]
mod tests;
