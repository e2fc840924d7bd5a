//! Rendering of syntax trees back to B concrete syntax.
//!
//! Output is parenthesized around every compound operand, so it re-parses
//! to the same tree regardless of the precedence table.

use super::ast::*;

/// Render `node` as B text.
pub fn pretty_print(node: &Node) -> String {
    let mut out = String::new();
    write_node(node, &mut out);
    out
}

/// True when the printed form is self-delimiting and never needs parentheses.
fn is_atomic(node: &Node) -> bool {
    use Kind::*;
    matches!(
        node.kind,
        Integer(_)
            | String(_)
            | True
            | False
            | Identifier(_)
            | Builtin(_)
            | MaxInt
            | MinInt
            | EmptySet
            | EmptySequence
            | Succ
            | Pred
            | SetExtension
            | PowerSet
            | PowerSet1
            | FinSet
            | FinSet1
            | Card
            | Min
            | Max
            | Comprehension
            | Lambda
            | BoolOf
            | Domain
            | Range
            | Inverse
            | Image
            | Composition
            | Apply
            | SequenceExtension
            | Seq
            | Seq1
            | Size
            | First
            | Last
            | Front
            | Tail
            | Not
            | Forall
            | Exists
    )
}

fn operand(node: &Node, out: &mut String) {
    if is_atomic(node) {
        write_node(node, out);
    } else {
        out.push('(');
        write_node(node, out);
        out.push(')');
    }
}

fn binary(node: &Node, op: &str, out: &mut String) {
    operand(&node.children[0], out);
    out.push(' ');
    out.push_str(op);
    out.push(' ');
    operand(&node.children[1], out);
}

fn call(name: &str, node: &Node, out: &mut String) {
    out.push_str(name);
    out.push('(');
    write_list(&node.children, out);
    out.push(')');
}

fn write_list(items: &[Node], out: &mut String) {
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_node(item, out);
    }
}

fn binder_ids(ids: &Node, out: &mut String) {
    if ids.children.len() == 1 {
        write_node(&ids.children[0], out);
    } else {
        out.push('(');
        write_list(&ids.children, out);
        out.push(')');
    }
}

fn binary_symbol(kind: &Kind) -> Option<&'static str> {
    use Kind::*;
    Some(match kind {
        Add => "+",
        MinusOrSetSubtract => "-",
        MultOrCart | Mult | Cartesian => "*",
        Div => "/",
        Mod => "mod",
        Power => "**",
        Interval => "..",
        Union => "\\/",
        Intersection => "/\\",
        Pair => "|->",
        Relations => "<->",
        Functions(k) => k.symbol(),
        Override => "<+",
        DomainRestrict => "<|",
        RangeRestrict => "|>",
        DomainSubtract => "<<|",
        RangeSubtract => "|>>",
        Concat => "^",
        And => "&",
        Or => "or",
        Implies => "=>",
        Equivalence => "<=>",
        Equal => "=",
        NotEqual => "/=",
        Less => "<",
        LessEqual => "<=",
        Greater => ">",
        GreaterEqual => ">=",
        Member => ":",
        NotMember => "/:",
        Subset => "<:",
        StrictSubset => "<<:",
        NotSubset => "/<:",
        NotStrictSubset => "/<<:",
        _ => return None,
    })
}

fn function_name(kind: &Kind) -> Option<&'static str> {
    use Kind::*;
    Some(match kind {
        Succ => "succ",
        Pred => "pred",
        PowerSet => "POW",
        PowerSet1 => "POW1",
        FinSet => "FIN",
        FinSet1 => "FIN1",
        Card => "card",
        Min => "min",
        Max => "max",
        BoolOf => "bool",
        Domain => "dom",
        Range => "ran",
        Seq => "seq",
        Seq1 => "seq1",
        Size => "size",
        First => "first",
        Last => "last",
        Front => "front",
        Tail => "tail",
        Not => "not",
        _ => return None,
    })
}

fn write_node(node: &Node, out: &mut String) {
    use Kind::*;
    if let Some(op) = binary_symbol(&node.kind) {
        binary(node, op, out);
        return;
    }
    if let Some(name) = function_name(&node.kind) {
        call(name, node, out);
        return;
    }
    let c = &node.children;
    match &node.kind {
        Integer(n) => out.push_str(&n.to_string()),
        String(s) => {
            out.push('"');
            out.push_str(s);
            out.push('"');
        }
        True => out.push_str("TRUE"),
        False => out.push_str("FALSE"),
        Identifier(name) => out.push_str(name),
        Builtin(b) => out.push_str(b.keyword()),
        MaxInt => out.push_str("MAXINT"),
        MinInt => out.push_str("MININT"),
        EmptySet => out.push_str("{}"),
        EmptySequence => out.push_str("[]"),
        UnaryMinus => {
            out.push('-');
            operand(&c[0], out);
        }
        SetExtension => {
            out.push('{');
            write_list(c, out);
            out.push('}');
        }
        SequenceExtension => {
            out.push('[');
            write_list(c, out);
            out.push(']');
        }
        Comprehension => {
            out.push('{');
            write_list(&c[0].children, out);
            out.push_str(" | ");
            write_node(&c[1], out);
            out.push('}');
        }
        Lambda => {
            out.push('%');
            binder_ids(&c[0], out);
            out.push_str(".(");
            write_node(&c[1], out);
            out.push_str(" | ");
            write_node(&c[2], out);
            out.push(')');
        }
        Forall | Exists => {
            out.push(if node.kind == Forall { '!' } else { '#' });
            binder_ids(&c[0], out);
            out.push_str(".(");
            write_node(&c[1], out);
            out.push(')');
        }
        Inverse => {
            operand(&c[0], out);
            out.push('~');
        }
        Image => {
            operand(&c[0], out);
            out.push('[');
            write_node(&c[1], out);
            out.push(']');
        }
        Composition => {
            out.push('(');
            operand(&c[0], out);
            out.push_str(" ; ");
            operand(&c[1], out);
            out.push(')');
        }
        Apply => {
            operand(&c[0], out);
            out.push('(');
            write_list(&c[1..], out);
            out.push(')');
        }
        List => write_list(c, out),

        Skip => out.push_str("skip"),
        Assign => {
            write_list(&c[0].children, out);
            out.push_str(" := ");
            write_list(&c[1].children, out);
        }
        BecomesElementOf => {
            write_list(&c[0].children, out);
            out.push_str(" :: ");
            write_node(&c[1], out);
        }
        BecomesSuchThat => {
            write_list(&c[0].children, out);
            out.push_str(" : (");
            write_node(&c[1], out);
            out.push(')');
        }
        Block => {
            out.push_str("BEGIN ");
            write_node(&c[0], out);
            out.push_str(" END");
        }
        Sequence | Parallel => {
            let sep = if node.kind == Sequence { " ; " } else { " || " };
            write_node(&c[0], out);
            out.push_str(sep);
            // The grammar is left-associative; group a right operand that would
            // otherwise re-associate.
            let regroup = matches!(c[1].kind, Sequence) || (node.kind == Parallel && c[1].kind == Parallel);
            if regroup {
                out.push_str("BEGIN ");
                write_node(&c[1], out);
                out.push_str(" END");
            } else {
                write_node(&c[1], out);
            }
        }
        Precondition => {
            out.push_str("PRE ");
            write_node(&c[0], out);
            out.push_str(" THEN ");
            write_node(&c[1], out);
            out.push_str(" END");
        }
        If => {
            out.push_str("IF ");
            write_node(&c[0], out);
            out.push_str(" THEN ");
            write_node(&c[1], out);
            out.push_str(" ELSE ");
            write_node(&c[2], out);
            out.push_str(" END");
        }
        Select { has_else } => {
            let pairs = if *has_else { c.len() - 1 } else { c.len() };
            for (i, pair) in c[..pairs].chunks(2).enumerate() {
                out.push_str(if i == 0 { "SELECT " } else { " WHEN " });
                write_node(&pair[0], out);
                out.push_str(" THEN ");
                write_node(&pair[1], out);
            }
            if *has_else {
                out.push_str(" ELSE ");
                write_node(&c[c.len() - 1], out);
            }
            out.push_str(" END");
        }
        Choice => {
            out.push_str("CHOICE ");
            for (i, branch) in c.iter().enumerate() {
                if i > 0 {
                    out.push_str(" OR ");
                }
                write_node(branch, out);
            }
            out.push_str(" END");
        }
        Any => {
            out.push_str("ANY ");
            write_list(&c[0].children, out);
            out.push_str(" WHERE ");
            write_node(&c[1], out);
            out.push_str(" THEN ");
            write_node(&c[2], out);
            out.push_str(" END");
        }
        Call(name) => {
            out.push_str(name);
            if !c.is_empty() {
                out.push('(');
                write_list(c, out);
                out.push(')');
            }
        }
        other => unreachable!("no rendering for {other:?}"),
    }
}

/// Render a whole machine.
pub fn pretty_print_machine(machine: &MachineAst) -> String {
    let mut out = format!("MACHINE {}\n", machine.name);
    let names = |nodes: &[Node]| {
        nodes
            .iter()
            .map(pretty_print)
            .collect::<Vec<_>>()
            .join(", ")
    };
    if !machine.sets.is_empty() {
        let sets: Vec<String> = machine
            .sets
            .iter()
            .map(|s| match &s.elements {
                Some(els) => format!("{} = {{{}}}", s.name, els.join(", ")),
                None => s.name.clone(),
            })
            .collect();
        out.push_str(&format!("SETS\n  {}\n", sets.join(";\n  ")));
    }
    if !machine.definitions.is_empty() {
        let defs: Vec<String> = machine
            .definitions
            .iter()
            .map(|d| {
                let head = if d.params.is_empty() {
                    d.name.clone()
                } else {
                    format!("{}({})", d.name, d.params.join(", "))
                };
                format!("{head} == {}", pretty_print(&d.body))
            })
            .collect();
        out.push_str(&format!("DEFINITIONS\n  {}\n", defs.join(";\n  ")));
    }
    if !machine.constants.is_empty() {
        out.push_str(&format!("CONSTANTS {}\n", names(&machine.constants)));
    }
    if let Some(p) = &machine.properties {
        out.push_str(&format!("PROPERTIES\n  {}\n", pretty_print(p)));
    }
    if !machine.variables.is_empty() {
        out.push_str(&format!("VARIABLES {}\n", names(&machine.variables)));
    }
    if let Some(p) = &machine.invariant {
        out.push_str(&format!("INVARIANT\n  {}\n", pretty_print(p)));
    }
    if !machine.assertions.is_empty() {
        let a: Vec<String> = machine.assertions.iter().map(pretty_print).collect();
        out.push_str(&format!("ASSERTIONS\n  {}\n", a.join(";\n  ")));
    }
    if let Some(init) = &machine.initialisation {
        out.push_str(&format!("INITIALISATION\n  {}\n", pretty_print(init)));
    }
    if !machine.operations.is_empty() {
        let ops: Vec<String> = machine
            .operations
            .iter()
            .map(|op| {
                let head = if op.params.is_empty() {
                    op.name.clone()
                } else {
                    format!("{}({})", op.name, names(&op.params))
                };
                format!("{head} = {}", pretty_print(&op.body))
            })
            .collect();
        out.push_str(&format!("OPERATIONS\n  {}\n", ops.join(";\n  ")));
    }
    out.push_str("END\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_expression, parse_predicate, parse_substitution};

    #[test]
    fn renders_examples() {
        let p = parse_predicate("1+1=x").unwrap();
        assert_eq!(pretty_print(&p.root), "(1 + 1) = x");
        let l = parse_expression("%x.(x>0 & x<4|x*x)").unwrap();
        assert_eq!(pretty_print(&l.root), "%x.((x > 0) & (x < 4) | x * x)");
        let s = parse_substitution("skip").unwrap();
        assert_eq!(pretty_print(&s.root), "skip");
    }

    #[test]
    fn lambda_round_trip() {
        let l = parse_expression("%x.(x>0 & x<4|x*x)").unwrap();
        let again = parse_expression(&pretty_print(&l.root)).unwrap();
        assert!(l.root.same_shape(&again.root));
    }
}
