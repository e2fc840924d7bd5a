//! `DEFINITIONS` macro expansion.
//!
//! Expansion is syntactic and capture-avoiding: a binder inside a definition
//! body whose identifier occurs free in an actual argument is renamed first.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::ast::*;

/// Nested expansion depth at which a definition is considered cyclic.
pub const MAX_EXPANSION_DEPTH: usize = 500;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DefinitionError {
    #[error("DEFINITION ERROR {span}: {name} expects {expected} arguments, found {found}")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
        span: SourceSpan,
    },
    #[error("DEFINITION ERROR {span}: expansion of {name} does not terminate")]
    Cyclic { name: String, span: SourceSpan },
    #[error("DEFINITION ERROR {span}: unknown substitution {name}")]
    UnknownCall { name: String, span: SourceSpan },
}

struct Expander<'a> {
    defs: BTreeMap<&'a str, &'a Definition>,
    fresh: usize,
}

/// Expand all definition calls in `node`.
pub fn expand_node(node: &Node, defs: &[Definition]) -> Result<Node, DefinitionError> {
    let mut ex = Expander {
        defs: defs.iter().map(|d| (d.name.as_str(), d)).collect(),
        fresh: 0,
    };
    ex.expand(node, 0)
}

/// Expand a parse unit; the result contains no definition calls.
pub fn expand_definitions(unit: &ParseUnit, defs: &[Definition]) -> Result<ParseUnit, DefinitionError> {
    Ok(ParseUnit {
        kind: unit.kind,
        root: expand_node(&unit.root, defs)?,
    })
}

/// Expand every clause of a machine with its own DEFINITIONS, which are then
/// dropped from the result.
pub fn expand_machine(machine: &MachineAst) -> Result<MachineAst, DefinitionError> {
    let defs = &machine.definitions;
    let ex = |n: &Node| expand_node(n, defs);
    Ok(MachineAst {
        name: machine.name.clone(),
        sets: machine.sets.clone(),
        constants: machine.constants.clone(),
        properties: machine.properties.as_ref().map(ex).transpose()?,
        variables: machine.variables.clone(),
        invariant: machine.invariant.as_ref().map(ex).transpose()?,
        assertions: machine.assertions.iter().map(ex).collect::<Result<_, _>>()?,
        definitions: Vec::new(),
        initialisation: machine.initialisation.as_ref().map(ex).transpose()?,
        operations: machine
            .operations
            .iter()
            .map(|op| {
                Ok(Operation {
                    name: op.name.clone(),
                    params: op.params.clone(),
                    body: ex(&op.body)?,
                    span: op.span,
                })
            })
            .collect::<Result<_, DefinitionError>>()?,
    })
}

/// True when `node` still contains a call to one of `defs` (or any `Call`).
pub fn contains_definition_call(node: &Node, defs: &[Definition]) -> bool {
    let mut found = false;
    node.walk(&mut |n| match &n.kind {
        Kind::Call(_) => found = true,
        Kind::Identifier(name) if defs.iter().any(|d| &d.name == name) => found = true,
        _ => {}
    });
    found
}

impl<'a> Expander<'a> {
    fn expand(&mut self, node: &Node, depth: usize) -> Result<Node, DefinitionError> {
        match &node.kind {
            Kind::Identifier(name) => {
                if let Some(def) = self.defs.get(name.as_str()).copied() {
                    return self.instantiate(def, &[], node.span, depth);
                }
            }
            Kind::Apply => {
                if let Some(name) = node.children[0].identifier_name() {
                    if let Some(def) = self.defs.get(name).copied() {
                        if !def.params.is_empty() {
                            return self.instantiate(def, &node.children[1..], node.span, depth);
                        }
                    }
                }
            }
            Kind::Call(name) => {
                return match self.defs.get(name.as_str()).copied() {
                    Some(def) => self.instantiate(def, &node.children, node.span, depth),
                    None => Err(DefinitionError::UnknownCall {
                        name: name.clone(),
                        span: node.span,
                    }),
                };
            }
            _ => {}
        }
        let children = node
            .children
            .iter()
            .map(|c| self.expand(c, depth))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Node {
            kind: node.kind.clone(),
            children,
            span: node.span,
            ty: node.ty.clone(),
        })
    }

    fn instantiate(
        &mut self,
        def: &Definition,
        args: &[Node],
        span: SourceSpan,
        depth: usize,
    ) -> Result<Node, DefinitionError> {
        if depth >= MAX_EXPANSION_DEPTH {
            return Err(DefinitionError::Cyclic {
                name: def.name.clone(),
                span,
            });
        }
        if args.len() != def.params.len() {
            return Err(DefinitionError::Arity {
                name: def.name.clone(),
                expected: def.params.len(),
                found: args.len(),
                span,
            });
        }
        let args = args
            .iter()
            .map(|a| self.expand(a, depth))
            .collect::<Result<Vec<_>, _>>()?;
        let mapping: BTreeMap<&str, &Node> = def.params.iter().map(String::as_str).zip(&args).collect();
        let arg_free: BTreeSet<String> = args.iter().flat_map(Node::free_identifiers).collect();
        let body = self.substitute(&def.body, &mapping, &arg_free);
        self.expand(&body, depth + 1)
    }

    fn fresh_name(&mut self, base: &str, avoid: &BTreeSet<String>) -> String {
        loop {
            self.fresh += 1;
            let candidate = format!("{base}_{}", self.fresh);
            if !avoid.contains(&candidate) {
                return candidate;
            }
        }
    }

    fn substitute(&mut self, node: &Node, mapping: &BTreeMap<&str, &Node>, arg_free: &BTreeSet<String>) -> Node {
        match &node.kind {
            Kind::Identifier(name) => {
                if let Some(arg) = mapping.get(name.as_str()) {
                    return (*arg).clone();
                }
                node.clone()
            }
            kind if kind.is_binder() => {
                let mut renames: BTreeMap<String, String> = BTreeMap::new();
                let mut inner = mapping.clone();
                for name in node.bound_names() {
                    inner.remove(name);
                    if arg_free.contains(name) {
                        let mut avoid = arg_free.clone();
                        avoid.extend(node.free_identifiers());
                        let fresh = self.fresh_name(name, &avoid);
                        renames.insert(name.to_owned(), fresh);
                    }
                }
                let rename_nodes: Vec<Node> = renames.values().map(|n| Node::ident(n.clone())).collect();
                let mut renamed_mapping = inner;
                for ((old, _), fresh_node) in renames.iter().zip(&rename_nodes) {
                    renamed_mapping.insert(old.as_str(), fresh_node);
                }
                let ids = Node {
                    kind: Kind::List,
                    children: node.children[0]
                        .children
                        .iter()
                        .map(|id| match id.identifier_name().and_then(|n| renames.get(n)) {
                            Some(fresh) => Node::leaf(Kind::Identifier(fresh.clone()), id.span),
                            None => id.clone(),
                        })
                        .collect(),
                    span: node.children[0].span,
                    ty: None,
                };
                let mut children = vec![ids];
                for child in &node.children[1..] {
                    children.push(self.substitute(child, &renamed_mapping, arg_free));
                }
                Node::new(node.kind.clone(), children, node.span)
            }
            Kind::Call(name) if mapping.contains_key(name.as_str()) => {
                // A parameter used in call position, e.g. a substitution argument.
                (*mapping[name.as_str()]).clone()
            }
            _ => Node::new(
                node.kind.clone(),
                node.children
                    .iter()
                    .map(|c| self.substitute(c, mapping, arg_free))
                    .collect(),
                node.span,
            ),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_machine, parse_predicate, parse_substitution, pretty_print};

    fn defs(src: &str) -> Vec<Definition> {
        parse_machine(&format!("MACHINE M DEFINITIONS {src} END")).unwrap().definitions
    }

    #[test]
    fn substitution_definition() {
        let d = defs("Assign(Expr, VarName) == VarName := Expr");
        let unit = parse_substitution("Assign(x+1, z)").unwrap();
        let out = expand_definitions(&unit, &d).unwrap();
        assert_eq!(pretty_print(&out.root), "z := x + 1");
        assert!(!contains_definition_call(&out.root, &d));
    }

    #[test]
    fn no_definitions_is_identity() {
        let unit = parse_predicate("x = 1 & y : NAT").unwrap();
        let out = expand_definitions(&unit, &[]).unwrap();
        assert!(out.root.same_shape(&unit.root));
    }

    #[test]
    fn predicate_definition_in_machine() {
        let m = parse_machine(
            "MACHINE M VARIABLES x INVARIANT Ok(x) DEFINITIONS Ok(v) == v : NAT INITIALISATION x := 0 END",
        )
        .unwrap();
        let m = expand_machine(&m).unwrap();
        assert_eq!(pretty_print(m.invariant.as_ref().unwrap()), "x : NAT");
    }

    #[test]
    fn self_reference_is_cyclic() {
        let d = defs("D == D");
        let unit = parse_predicate("D = 1").unwrap();
        assert!(matches!(
            expand_definitions(&unit, &d),
            Err(DefinitionError::Cyclic { .. })
        ));
    }

    #[test]
    fn arity_mismatch() {
        let d = defs("Sq(a) == a*a");
        let unit = parse_predicate("Sq(1, 2) = 1").unwrap();
        assert!(matches!(
            expand_definitions(&unit, &d),
            Err(DefinitionError::Arity { expected: 1, found: 2, .. })
        ));
    }

    #[test]
    fn nested_definitions() {
        let d = defs("Sq(a) == a*a; Quad(b) == Sq(Sq(b))");
        let unit = parse_predicate("Quad(2) = 16").unwrap();
        let out = expand_definitions(&unit, &d).unwrap();
        assert_eq!(pretty_print(&out.root), "((2 * 2) * (2 * 2)) = 16");
    }

    #[test]
    fn capture_is_avoided() {
        let d = defs("Bigger(v) == {x | x : 1..10 & x > v}");
        let unit = parse_predicate("card(Bigger(x)) = 2").unwrap();
        let out = expand_definitions(&unit, &d).unwrap();
        let printed = pretty_print(&out.root);
        assert_eq!(printed, "card({x_1 | (x_1 : (1 .. 10)) & (x_1 > x)}) = 2");
    }
}
