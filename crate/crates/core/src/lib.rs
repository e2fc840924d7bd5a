//! Independent evaluator, animator and state double-checker for the B
//! specification language.
//!
//! Formulas flow through [`syntax`] (parse), [`typing`] (infer) and
//! [`interp`] (evaluate over [`values`] inside a [`state::Environment`]).
//! [`animate`] executes substitutions and machine operations, and
//! [`validate`] re-checks externally produced states and traces.

pub mod error;
pub mod syntax;
pub mod typing;
pub mod values;
pub mod state;
pub mod interp;
pub mod animate;
pub mod validate;
pub mod cli;

pub use error::{Error, Result};
