//! Executing substitutions and operations of a loaded machine.

mod console;
mod exec;
mod machine;

pub use console::Animator;
pub use exec::{exec, exec_substitution, Branch, Successor, SuccessorSet, Writes};
pub use machine::{
    check_invariant, enabled_operations, evaluate_conjuncts, initialise, load_machine, machine_environment,
    operation_instances, set_up_constants, ClauseResult, Enabled, EnabledOperation, InvariantVerdict, Outcome,
};
