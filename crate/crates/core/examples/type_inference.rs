//! Infer types for free identifiers, show the `*` disambiguation and a
//! rejected ambiguity.
//!
//! `cargo run --example type_inference`

use bcheck::syntax::parse_predicate;
use bcheck::typing::{infer, TypeContext};

fn main() {
    for text in [
        "x = y + 1",
        "z = x * y & x : POW(INTEGER) & y : POW(BOOL)",
        "a = b * c & b = 2",
        "r : 1..3 <-> BOOL & s = dom(r)",
        "x = {}",
        "1 = TRUE",
    ] {
        let mut unit = parse_predicate(text).expect("parses");
        match infer(&mut unit, &mut TypeContext::new()) {
            Ok(types) => {
                let listing: Vec<String> = types.iter().map(|(k, t)| format!("{k} : {t}")).collect();
                println!("{text}\n    {}", listing.join(", "));
            }
            Err(e) => println!("{text}\n    {e}"),
        }
    }
}
