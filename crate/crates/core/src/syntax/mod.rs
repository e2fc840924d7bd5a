//! Lexing, parsing, definition expansion and pretty printing of B text.

mod ast;
mod definitions;
mod lexer;
mod parser;
mod pretty;

pub use ast::*;
pub use definitions::{
    contains_definition_call, expand_definitions, expand_machine, expand_node, DefinitionError,
    MAX_EXPANSION_DEPTH,
};
pub use lexer::{tokenize, Keyword, LexError, Sym, Token, TokenKind};
pub use parser::{
    check_category, parse_expression, parse_expression_list, parse_formula, parse_machine,
    parse_predicate, parse_substitution, ParseError, Parser, SyntaxError, PRECEDENCE,
};
pub use pretty::{pretty_print, pretty_print_machine};
