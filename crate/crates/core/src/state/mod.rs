//! Environments, machine states and the saved state space.

mod config;
mod env;
mod space;
#[allow(clippy::module_inception)]
mod state;

pub use config::EvalConfig;
pub use env::Environment;
pub use space::{StateRef, StateSpace, Transition};
pub use state::{State, StateId};
