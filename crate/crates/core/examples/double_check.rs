//! Double-check externally produced states against the cruise-control model.
//!
//! `cargo run --example double_check`

use bcheck::animate::{load_machine, machine_environment};
use bcheck::state::EvalConfig;
use bcheck::validate::{check_state, load_state_text, Claim};

fn main() -> bcheck::Result<()> {
    let machine = load_machine(include_str!("../fixtures/cruise.mch"))?;
    let mut env = machine_environment(machine, EvalConfig::default());
    for (name, text) in [
        ("reported state", include_str!("../fixtures/cruise_state.txt")),
        ("mutated state", include_str!("../fixtures/cruise_state_mutated.txt")),
    ] {
        let state = load_state_text(text, &mut env)?;
        let verdict = check_state(&mut env, &state, Some(Claim::Ok));
        println!("{name}: claimed ok, verdict {}", verdict.outcome);
        for clause in verdict.failed() {
            println!("    failed: {clause}");
        }
    }
    Ok(())
}
