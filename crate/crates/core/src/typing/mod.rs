//! Type inference by unification.

mod infer;
mod types;

pub use infer::{infer, infer_expression_as, infer_machine, TypeContext, TypeError, TypedMachine};
pub use types::{unify, BType, TypeSubstitution, UnifyError};
