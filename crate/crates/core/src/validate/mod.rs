//! Double-checking externally produced states and traces.

mod statefile;
mod trace;
mod verdict;

pub use statefile::{closed_context, complete_state, load_state_file, load_state_text, parse_bindings};
pub use trace::{check_trace, parse_trace, StepOutcome, StepVerdict, TraceFile, TraceStep, TraceVerdict};
pub use verdict::{check_state, Claim, ClauseReport, Section, Verdict, VerdictOutcome};

#[cfg(test)]
mod tests;
