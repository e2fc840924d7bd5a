//! Drive the console animator with a scripted session: initialise, admit a
//! process, backtrack, quit.
//!
//! `cargo run --example scheduler_animation`

use bcheck::animate::{load_machine, machine_environment, Animator};
use bcheck::state::EvalConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let machine = load_machine(include_str!("../fixtures/scheduler.mch"))?;
    let mut animator = Animator::new(machine_environment(machine, EvalConfig::default()))?;
    let mut script = "1\n1\n3\nu\nq\n".as_bytes();
    animator.run(&mut script, &mut std::io::stdout().lock())?;
    println!("\nsaved states: {}", animator.space().states().len());
    Ok(())
}
