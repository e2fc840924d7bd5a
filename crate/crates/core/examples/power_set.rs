//! Power sets stay symbolic for membership and cardinality and are only
//! built when iterated.
//!
//! `cargo run --release --example power_set`

use std::time::Instant;

use bcheck::cli::Session;
use bcheck::state::EvalConfig;

fn main() -> bcheck::Result<()> {
    // Iterating all 2^18 subsets needs more than the default candidate budget.
    let config = EvalConfig {
        max_enum: 1 << 19,
        ..EvalConfig::default()
    };
    let mut session = Session::new(None, config)?;
    for n in [4, 16, 60] {
        println!("card(POW(1..{n})) = {}", session.eval(&format!("card(POW(1..{n}))"))?);
    }
    println!("{{1,7}} : POW(1..60) = {}", session.eval("{1,7} : POW(1..60)")?);
    let start = Instant::now();
    let count = session.eval("card({s | s : POW(1..18) & 1 : s})")?;
    println!("subsets of 1..18 containing 1: {count} ({:?})", start.elapsed());
    Ok(())
}
