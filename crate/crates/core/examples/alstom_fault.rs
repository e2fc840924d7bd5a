//! A partial surjection onto NATURAL initialised with `{}` violates its
//! invariant; the partial-function variant does not.
//!
//! `cargo run --example alstom_fault`

use bcheck::animate::{check_invariant, initialise, load_machine, machine_environment};
use bcheck::state::EvalConfig;

fn verdict(source: &str) -> bcheck::Result<String> {
    let mut env = machine_environment(load_machine(source)?, EvalConfig::default());
    let root = initialise(&mut env)?.remove(0).state;
    Ok(check_invariant(&mut env, &root)?.to_string())
}

fn main() -> bcheck::Result<()> {
    println!("faulty: {}", verdict(include_str!("../fixtures/alstom_fault.mch"))?);
    println!("fixed:  {}", verdict(include_str!("../fixtures/alstom_fixed.mch"))?);
    Ok(())
}
