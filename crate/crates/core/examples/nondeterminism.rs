//! Every branch of a nondeterministic substitution yields its own successor.
//!
//! `cargo run --example nondeterminism`

use bcheck::animate::{exec_substitution, initialise, load_machine, machine_environment};
use bcheck::state::EvalConfig;
use bcheck::syntax::parse_substitution;
use bcheck::typing::{infer, TypeContext};

const MACHINE: &str = "MACHINE Pick
VARIABLES x, y
INVARIANT x : NAT & y : NAT
INITIALISATION x, y := 0, 0
END";

fn main() -> bcheck::Result<()> {
    let machine = load_machine(MACHINE)?;
    let mut env = machine_environment(machine, EvalConfig::default());
    let root = initialise(&mut env)?.remove(0).state;
    for text in [
        "CHOICE x := 1 OR x := 2 OR x := 3 END",
        "ANY z WHERE z : 1..4 & z mod 2 = 0 THEN y := z END",
        "x :: {5, 6} ; y := x + 1",
        "SELECT x = 0 THEN x := 10 WHEN y = 0 THEN y := 10 END",
    ] {
        let machine = env.machine().cloned().expect("loaded");
        let mut unit = parse_substitution(text)?;
        let mut ctx = TypeContext::for_machine(&machine);
        ctx.assignable = Some(["x".to_owned(), "y".to_owned()].into());
        infer(&mut unit, &mut ctx)?;
        println!("{text}");
        print!("{}", exec_substitution(&unit.root, &mut env, &root)?);
    }
    Ok(())
}
