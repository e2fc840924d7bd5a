//! Parse `1+1=x` and print its syntax tree, then pretty-print it back.
//!
//! `cargo run --example ast`

use bcheck::syntax::{parse_predicate, pretty_print, Node};

fn show(node: &Node, depth: usize) {
    println!("{}{:?}", "  ".repeat(depth), node.kind);
    for child in &node.children {
        show(child, depth + 1);
    }
}

fn main() -> Result<(), bcheck::syntax::SyntaxError> {
    let unit = parse_predicate("1+1=x")?;
    println!("{:?} unit", unit.kind);
    show(&unit.root, 1);
    println!("pretty: {}", pretty_print(&unit.root));
    Ok(())
}
