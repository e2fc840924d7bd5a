//! Evaluate expressions and predicates, including a lambda and a witness search.
//!
//! `cargo run --example evaluate`

use bcheck::cli::Session;
use bcheck::state::EvalConfig;

fn main() -> bcheck::Result<()> {
    let mut session = Session::new(None, EvalConfig::default())?;
    for text in [
        "%x.(x>0 & x<4|x*x)",
        "{x | x : 1..20 & x mod 7 = 0}",
        "card(POW(1..5))",
        "!x.(x : 1..10 => x * x >= x)",
        "(1..3) <| {(1|->2), (4|->5)}",
        "[3, 1, 2] ^ [9]",
    ] {
        println!("{text}  ==>  {}", session.eval(text)?);
    }
    Ok(())
}
