//! Replay a claimed operation trace and report per-step agreement.
//!
//! `cargo run --example trace_replay`

use bcheck::animate::{load_machine, machine_environment};
use bcheck::state::EvalConfig;
use bcheck::validate::{check_trace, parse_trace};

fn main() -> bcheck::Result<()> {
    let machine = load_machine(include_str!("../fixtures/cruise.mch"))?;
    let mut env = machine_environment(machine, EvalConfig::default());
    let text = include_str!("../fixtures/cruise_trace.txt");
    print!("{}", check_trace(&mut env, &parse_trace(text)?, 0)?.report());

    let tampered = text.replace("ObstacleDistance = ODclose", "ObstacleDistance = ODveryclose");
    print!("{}", check_trace(&mut env, &parse_trace(&tampered)?, 0)?.report());
    Ok(())
}
