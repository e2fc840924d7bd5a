//! Recursive descent parser with precedence climbing for formulas.
//!
//! Predicates and expressions share one operator grammar; the category of
//! every node is checked after parsing so that `x` in predicate position or
//! `1 & 2` are rejected with a span.

use thiserror::Error;

use super::ast::*;
use super::lexer::{tokenize, Keyword, LexError, Sym, Token, TokenKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("PARSE ERROR {span}: expected {}, found {found}", expected.join(" or "))]
pub struct ParseError {
    pub span: SourceSpan,
    pub expected: Vec<String>,
    pub found: String,
}

impl ParseError {
    pub fn new(span: SourceSpan, expected: impl Into<String>, found: impl Into<String>) -> Self {
        Self {
            span,
            expected: vec![expected.into()],
            found: found.into(),
        }
    }
}

/// Lexical or grammatical failure.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

impl SyntaxError {
    pub fn span(&self) -> SourceSpan {
        match self {
            SyntaxError::Lex(e) => e.span,
            SyntaxError::Parse(e) => e.span,
        }
    }
}

pub type ParseResult<T> = Result<T, ParseError>;

/// Binding power of infix operators. Higher binds tighter.
///
/// | level | operators |
/// |-------|-----------|
/// | 30  | `=>` |
/// | 40  | `&` `or` |
/// | 60  | `<=>` |
/// | 70  | `=` `/=` `<` `<=` `>` `>=` `:` `/:` `<:` `<<:` `/<:` `/<<:` (non-associative) |
/// | 125 | `<->` and the seven function arrows |
/// | 160 | `\|->` `<+` `<\|` `\|>` `<<\|` `\|>>` `\/` `/\` `^` |
/// | 170 | `..` |
/// | 180 | `+` `-` |
/// | 190 | `*` `/` `mod` |
/// | 200 | `**` (right-associative) |
/// | 210 | unary `-` |
/// | 230 | postfix `~`, application `f(x)`, image `r[s]` |
///
/// `;` (relational composition) is accepted only inside parentheses, where it
/// binds loosest, because at substitution level it means sequencing.
pub const PRECEDENCE: &[(&str, u8)] = &[
    ("=>", 30),
    ("&", 40),
    ("or", 40),
    ("<=>", 60),
    ("=", 70),
    ("/=", 70),
    ("<", 70),
    ("<=", 70),
    (">", 70),
    (">=", 70),
    (":", 70),
    ("/:", 70),
    ("<:", 70),
    ("<<:", 70),
    ("/<:", 70),
    ("/<<:", 70),
    ("<->", 125),
    ("+->", 125),
    ("-->", 125),
    (">+>", 125),
    (">->", 125),
    ("+->>", 125),
    ("-->>", 125),
    (">->>", 125),
    ("|->", 160),
    ("<+", 160),
    ("<|", 160),
    ("|>", 160),
    ("<<|", 160),
    ("|>>", 160),
    ("\\/", 160),
    ("/\\", 160),
    ("^", 160),
    ("..", 170),
    ("+", 180),
    ("-", 180),
    ("*", 190),
    ("/", 190),
    ("mod", 190),
    ("**", 200),
];

const UNARY_MINUS_PREC: u8 = 210;
const POSTFIX_PREC: u8 = 230;
/// Operand level for `not`: binds tighter than `&` but includes comparisons.
const NOT_OPERAND_PREC: u8 = 70;
/// Targets of assignments stop before `:`, `::` and `:=`.
const TARGET_PREC: u8 = 71;

fn infix(kind: &TokenKind) -> Option<(Kind, u8, bool)> {
    use Sym::*;
    let (k, text, right) = match kind {
        TokenKind::Sym(s) => {
            let k = match s {
                Implies => Kind::Implies,
                And => Kind::And,
                Equiv => Kind::Equivalence,
                Equal => Kind::Equal,
                NotEqual => Kind::NotEqual,
                Less => Kind::Less,
                LessEqual => Kind::LessEqual,
                Greater => Kind::Greater,
                GreaterEqual => Kind::GreaterEqual,
                Colon => Kind::Member,
                NotMember => Kind::NotMember,
                Subset => Kind::Subset,
                StrictSubset => Kind::StrictSubset,
                NotSubset => Kind::NotSubset,
                NotStrictSubset => Kind::NotStrictSubset,
                Relations => Kind::Relations,
                PartialFn => Kind::Functions(FunctionKind::Partial),
                TotalFn => Kind::Functions(FunctionKind::Total),
                PartialInj => Kind::Functions(FunctionKind::PartialInjection),
                TotalInj => Kind::Functions(FunctionKind::TotalInjection),
                PartialSurj => Kind::Functions(FunctionKind::PartialSurjection),
                TotalSurj => Kind::Functions(FunctionKind::TotalSurjection),
                TotalBij => Kind::Functions(FunctionKind::TotalBijection),
                Maps => Kind::Pair,
                Override => Kind::Override,
                DomRestrict => Kind::DomainRestrict,
                RanRestrict => Kind::RangeRestrict,
                DomSubtract => Kind::DomainSubtract,
                RanSubtract => Kind::RangeSubtract,
                Union => Kind::Union,
                Inter => Kind::Intersection,
                Caret => Kind::Concat,
                DotDot => Kind::Interval,
                Plus => Kind::Add,
                Minus => Kind::MinusOrSetSubtract,
                Star => Kind::MultOrCart,
                Slash => Kind::Div,
                Power => Kind::Power,
                _ => return None,
            };
            (k, s.text(), matches!(s, Power))
        }
        TokenKind::Kw(Keyword::Or) => (Kind::Or, "or", false),
        TokenKind::Kw(Keyword::Mod) => (Kind::Mod, "mod", false),
        _ => return None,
    };
    let prec = PRECEDENCE
        .iter()
        .find(|(t, _)| *t == text)
        .map(|(_, p)| *p)
        .expect("every infix operator has a precedence");
    Some((k, prec, right))
}

fn unary_function(kw: Keyword) -> Option<Kind> {
    Some(match kw {
        Keyword::Pow => Kind::PowerSet,
        Keyword::Pow1 => Kind::PowerSet1,
        Keyword::Fin => Kind::FinSet,
        Keyword::Fin1 => Kind::FinSet1,
        Keyword::Card => Kind::Card,
        Keyword::Min => Kind::Min,
        Keyword::Max => Kind::Max,
        Keyword::Dom => Kind::Domain,
        Keyword::Ran => Kind::Range,
        Keyword::Size => Kind::Size,
        Keyword::First => Kind::First,
        Keyword::Last => Kind::Last,
        Keyword::Front => Kind::Front,
        Keyword::Tail => Kind::Tail,
        Keyword::Succ => Kind::Succ,
        Keyword::Pred => Kind::Pred,
        Keyword::Bool => Kind::BoolOf,
        Keyword::Seq => Kind::Seq,
        Keyword::Seq1 => Kind::Seq1,
        _ => return None,
    })
}

/// Token-stream parser. Construct with [`Parser::new`] or use the free
/// `parse_*` functions.
pub struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    /// Inside a machine, identifiers may stand for predicate definitions.
    definition_calls: bool,
}

impl Parser {
    pub fn new(tokens: Vec<Token>) -> Self {
        let mut tokens = tokens;
        if tokens.last().map(|t| &t.kind) != Some(&TokenKind::Eof) {
            let span = tokens.last().map(|t| t.span).unwrap_or_default();
            tokens.push(Token {
                kind: TokenKind::Eof,
                span,
            });
        }
        Self {
            tokens,
            pos: 0,
            definition_calls: false,
        }
    }

    pub fn from_source(source: &str) -> Result<Self, LexError> {
        Ok(Self::new(tokenize(source)?))
    }

    fn peek(&self) -> &TokenKind {
        &self.tokens[self.pos].kind
    }

    fn peek_at(&self, ahead: usize) -> &TokenKind {
        let idx = (self.pos + ahead).min(self.tokens.len() - 1);
        &self.tokens[idx].kind
    }

    fn span(&self) -> SourceSpan {
        self.tokens[self.pos].span
    }

    fn prev_span(&self) -> SourceSpan {
        self.tokens[self.pos.saturating_sub(1)].span
    }

    fn advance(&mut self) -> &Token {
        let tok = &self.tokens[self.pos];
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        tok
    }

    fn at_sym(&self, s: Sym) -> bool {
        *self.peek() == TokenKind::Sym(s)
    }

    fn at_kw(&self, k: Keyword) -> bool {
        *self.peek() == TokenKind::Kw(k)
    }

    fn eat_sym(&mut self, s: Sym) -> bool {
        if self.at_sym(s) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, k: Keyword) -> bool {
        if self.at_kw(k) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn error(&self, expected: impl Into<String>) -> ParseError {
        ParseError::new(self.span(), expected, self.peek().to_string())
    }

    fn expect_sym(&mut self, s: Sym) -> ParseResult<SourceSpan> {
        if self.at_sym(s) {
            Ok(self.advance().span)
        } else {
            Err(self.error(format!("'{}'", s.text())))
        }
    }

    fn expect_kw(&mut self, k: Keyword) -> ParseResult<SourceSpan> {
        if self.at_kw(k) {
            Ok(self.advance().span)
        } else {
            Err(self.error(k.text()))
        }
    }

    fn expect_ident(&mut self) -> ParseResult<Node> {
        match self.peek().clone() {
            TokenKind::Ident(name) => {
                let span = self.advance().span;
                Ok(Node::leaf(Kind::Identifier(name), span))
            }
            _ => Err(self.error("identifier")),
        }
    }

    pub fn expect_eof(&self) -> ParseResult<()> {
        if *self.peek() == TokenKind::Eof {
            Ok(())
        } else {
            Err(self.error("end of input"))
        }
    }

    /// Skip a leading `#PREDICATE` marker if present.
    pub fn skip_predicate_marker(&mut self) -> bool {
        if *self.peek() == TokenKind::PredicateMarker {
            self.advance();
            true
        } else {
            false
        }
    }

    // ---------------------------------------------------------------------
    // Formulas

    /// Parse a predicate or expression.
    pub fn parse_formula(&mut self) -> ParseResult<Node> {
        self.formula(0)
    }

    fn formula(&mut self, min_prec: u8) -> ParseResult<Node> {
        let mut lhs = self.prefix()?;
        loop {
            let tok = self.peek().clone();
            if let TokenKind::Sym(Sym::Tilde) = tok {
                if POSTFIX_PREC < min_prec {
                    break;
                }
                let end = self.advance().span;
                let span = lhs.span.merge(end);
                lhs = Node::new(Kind::Inverse, vec![lhs], span);
                continue;
            }
            if let TokenKind::Sym(Sym::LParen) = tok {
                if POSTFIX_PREC < min_prec {
                    break;
                }
                self.advance();
                let mut children = vec![lhs];
                children.extend(self.formula_list()?);
                let end = self.expect_sym(Sym::RParen)?;
                let span = children[0].span.merge(end);
                lhs = Node::new(Kind::Apply, children, span);
                continue;
            }
            if let TokenKind::Sym(Sym::LBracket) = tok {
                if POSTFIX_PREC < min_prec {
                    break;
                }
                self.advance();
                let arg = self.formula(0)?;
                let end = self.expect_sym(Sym::RBracket)?;
                let span = lhs.span.merge(end);
                lhs = Node::new(Kind::Image, vec![lhs, arg], span);
                continue;
            }
            let Some((kind, prec, right_assoc)) = infix(&tok) else {
                break;
            };
            if prec < min_prec {
                break;
            }
            self.advance();
            let next_min = if right_assoc { prec } else { prec + 1 };
            let rhs = self.formula(next_min)?;
            let span = lhs.span.merge(rhs.span);
            lhs = Node::new(kind, vec![lhs, rhs], span);
        }
        Ok(lhs)
    }

    fn formula_list(&mut self) -> ParseResult<Vec<Node>> {
        let mut items = vec![self.formula(0)?];
        while self.eat_sym(Sym::Comma) {
            items.push(self.formula(0)?);
        }
        Ok(items)
    }

    /// `x` or `(x, y, ...)`.
    fn binder_ids(&mut self) -> ParseResult<Node> {
        let start = self.span();
        let ids = if self.eat_sym(Sym::LParen) {
            let ids = self.ident_list()?;
            self.expect_sym(Sym::RParen)?;
            ids
        } else {
            vec![self.expect_ident()?]
        };
        Ok(Node::new(Kind::List, ids, start.merge(self.prev_span())))
    }

    fn ident_list(&mut self) -> ParseResult<Vec<Node>> {
        let mut ids = vec![self.expect_ident()?];
        while self.eat_sym(Sym::Comma) {
            ids.push(self.expect_ident()?);
        }
        Ok(ids)
    }

    fn looks_like_comprehension(&self) -> bool {
        let mut i = 0;
        loop {
            if !matches!(self.peek_at(i), TokenKind::Ident(_)) {
                return false;
            }
            match self.peek_at(i + 1) {
                TokenKind::Sym(Sym::Comma) => i += 2,
                TokenKind::Sym(Sym::Bar) => return true,
                _ => return false,
            }
        }
    }

    fn prefix(&mut self) -> ParseResult<Node> {
        let start = self.span();
        let tok = self.peek().clone();
        match tok {
            TokenKind::Int(n) => {
                self.advance();
                Ok(Node::leaf(Kind::Integer(n), start))
            }
            TokenKind::Str(s) => {
                self.advance();
                Ok(Node::leaf(Kind::String(s), start))
            }
            TokenKind::Ident(name) => {
                self.advance();
                Ok(Node::leaf(Kind::Identifier(name), start))
            }
            TokenKind::Kw(kw) => self.keyword_prefix(kw, start),
            TokenKind::Sym(Sym::Minus) => {
                self.advance();
                let operand = self.formula(UNARY_MINUS_PREC)?;
                let span = start.merge(operand.span);
                Ok(Node::new(Kind::UnaryMinus, vec![operand], span))
            }
            TokenKind::Sym(Sym::LParen) => {
                self.advance();
                let mut inner = self.formula(0)?;
                if self.at_sym(Sym::Comma) {
                    while self.eat_sym(Sym::Comma) {
                        let next = self.formula(0)?;
                        let span = inner.span.merge(next.span);
                        inner = Node::new(Kind::Pair, vec![inner, next], span);
                    }
                } else {
                    while self.eat_sym(Sym::Semicolon) {
                        let next = self.formula(0)?;
                        let span = inner.span.merge(next.span);
                        inner = Node::new(Kind::Composition, vec![inner, next], span);
                    }
                }
                self.expect_sym(Sym::RParen)?;
                Ok(inner)
            }
            TokenKind::Sym(Sym::LBrace) => {
                self.advance();
                if self.eat_sym(Sym::RBrace) {
                    return Ok(Node::leaf(Kind::EmptySet, start.merge(self.prev_span())));
                }
                if self.looks_like_comprehension() {
                    let ids_start = self.span();
                    let ids = self.ident_list()?;
                    let ids = Node::new(Kind::List, ids, ids_start.merge(self.prev_span()));
                    self.expect_sym(Sym::Bar)?;
                    let pred = self.formula(0)?;
                    let end = self.expect_sym(Sym::RBrace)?;
                    return Ok(Node::new(Kind::Comprehension, vec![ids, pred], start.merge(end)));
                }
                let items = self.formula_list()?;
                let end = self.expect_sym(Sym::RBrace)?;
                Ok(Node::new(Kind::SetExtension, items, start.merge(end)))
            }
            TokenKind::Sym(Sym::LBracket) => {
                self.advance();
                if self.eat_sym(Sym::RBracket) {
                    return Ok(Node::leaf(Kind::EmptySequence, start.merge(self.prev_span())));
                }
                let items = self.formula_list()?;
                let end = self.expect_sym(Sym::RBracket)?;
                Ok(Node::new(Kind::SequenceExtension, items, start.merge(end)))
            }
            TokenKind::Sym(Sym::EmptySeq) => {
                self.advance();
                Ok(Node::leaf(Kind::EmptySequence, start))
            }
            TokenKind::Sym(s @ (Sym::Forall | Sym::Exists)) => {
                self.advance();
                let ids = self.binder_ids()?;
                self.expect_sym(Sym::Dot)?;
                self.expect_sym(Sym::LParen)?;
                let body = self.formula(0)?;
                let end = self.expect_sym(Sym::RParen)?;
                let kind = if s == Sym::Forall {
                    Kind::Forall
                } else {
                    Kind::Exists
                };
                Ok(Node::new(kind, vec![ids, body], start.merge(end)))
            }
            TokenKind::Sym(Sym::Percent) => {
                self.advance();
                let ids = self.binder_ids()?;
                self.expect_sym(Sym::Dot)?;
                self.expect_sym(Sym::LParen)?;
                let pred = self.formula(0)?;
                self.expect_sym(Sym::Bar)?;
                let expr = self.formula(0)?;
                let end = self.expect_sym(Sym::RParen)?;
                Ok(Node::new(Kind::Lambda, vec![ids, pred, expr], start.merge(end)))
            }
            _ => Err(self.error("predicate or expression")),
        }
    }

    fn keyword_prefix(&mut self, kw: Keyword, start: SourceSpan) -> ParseResult<Node> {
        let leaf = match kw {
            Keyword::True => Some(Kind::True),
            Keyword::False => Some(Kind::False),
            Keyword::Integer => Some(Kind::Builtin(BuiltinSet::Integer)),
            Keyword::Natural => Some(Kind::Builtin(BuiltinSet::Natural)),
            Keyword::Natural1 => Some(Kind::Builtin(BuiltinSet::Natural1)),
            Keyword::Nat => Some(Kind::Builtin(BuiltinSet::Nat)),
            Keyword::Nat1 => Some(Kind::Builtin(BuiltinSet::Nat1)),
            Keyword::Int => Some(Kind::Builtin(BuiltinSet::Int)),
            Keyword::BoolSet => Some(Kind::Builtin(BuiltinSet::Bool)),
            Keyword::StringSet => Some(Kind::Builtin(BuiltinSet::String)),
            Keyword::MaxInt => Some(Kind::MaxInt),
            Keyword::MinInt => Some(Kind::MinInt),
            _ => None,
        };
        if let Some(kind) = leaf {
            self.advance();
            return Ok(Node::leaf(kind, start));
        }
        if kw == Keyword::Not {
            self.advance();
            let operand = self.formula(NOT_OPERAND_PREC)?;
            let span = start.merge(operand.span);
            return Ok(Node::new(Kind::Not, vec![operand], span));
        }
        if let Some(kind) = unary_function(kw) {
            self.advance();
            self.expect_sym(Sym::LParen)?;
            let arg = self.formula(0)?;
            let end = self.expect_sym(Sym::RParen)?;
            return Ok(Node::new(kind, vec![arg], start.merge(end)));
        }
        Err(self.error("predicate or expression"))
    }

    // ---------------------------------------------------------------------
    // Substitutions

    /// Parse a substitution, including `;` and `||` chains.
    pub fn parse_substitution(&mut self) -> ParseResult<Node> {
        let mut lhs = self.parallel_subst()?;
        while self.at_sym(Sym::Semicolon) && !self.semicolon_is_separator() {
            self.advance();
            let rhs = self.parallel_subst()?;
            let span = lhs.span.merge(rhs.span);
            lhs = Node::new(Kind::Sequence, vec![lhs, rhs], span);
        }
        Ok(lhs)
    }

    /// A `;` followed by a declaration head or a clause keyword ends a
    /// definition or operation body instead of sequencing substitutions.
    fn semicolon_is_separator(&self) -> bool {
        match self.peek_at(1) {
            TokenKind::Kw(k) => k.is_clause() || *k == Keyword::End,
            TokenKind::Eof => true,
            TokenKind::Ident(_) => {
                let mut i = 2;
                if *self.peek_at(i) == TokenKind::Sym(Sym::LParen) {
                    i += 1;
                    loop {
                        if !matches!(self.peek_at(i), TokenKind::Ident(_)) {
                            return false;
                        }
                        match self.peek_at(i + 1) {
                            TokenKind::Sym(Sym::Comma) => i += 2,
                            TokenKind::Sym(Sym::RParen) => {
                                i += 2;
                                break;
                            }
                            _ => return false,
                        }
                    }
                }
                matches!(
                    self.peek_at(i),
                    TokenKind::Sym(Sym::Equal) | TokenKind::Sym(Sym::DefEq)
                )
            }
            _ => false,
        }
    }

    fn parallel_subst(&mut self) -> ParseResult<Node> {
        let mut lhs = self.subst_atom()?;
        while self.eat_sym(Sym::Parallel) {
            let rhs = self.subst_atom()?;
            let span = lhs.span.merge(rhs.span);
            lhs = Node::new(Kind::Parallel, vec![lhs, rhs], span);
        }
        Ok(lhs)
    }

    fn predicate(&mut self) -> ParseResult<Node> {
        let node = self.formula(0)?;
        self.check(&node, Category::Predicate)?;
        Ok(node)
    }

    fn subst_atom(&mut self) -> ParseResult<Node> {
        let start = self.span();
        match self.peek().clone() {
            TokenKind::Kw(Keyword::Skip) => {
                self.advance();
                Ok(Node::leaf(Kind::Skip, start))
            }
            TokenKind::Kw(Keyword::Begin) => {
                self.advance();
                let body = self.parse_substitution()?;
                let end = self.expect_kw(Keyword::End)?;
                Ok(Node::new(Kind::Block, vec![body], start.merge(end)))
            }
            TokenKind::Kw(Keyword::Pre) => {
                self.advance();
                let cond = self.predicate()?;
                self.expect_kw(Keyword::Then)?;
                let body = self.parse_substitution()?;
                let end = self.expect_kw(Keyword::End)?;
                Ok(Node::new(Kind::Precondition, vec![cond, body], start.merge(end)))
            }
            TokenKind::Kw(Keyword::If) => {
                self.advance();
                let node = self.if_tail(start)?;
                Ok(node)
            }
            TokenKind::Kw(Keyword::Select) => {
                self.advance();
                let mut children = Vec::new();
                children.push(self.predicate()?);
                self.expect_kw(Keyword::Then)?;
                children.push(self.parse_substitution()?);
                while self.eat_kw(Keyword::When) {
                    children.push(self.predicate()?);
                    self.expect_kw(Keyword::Then)?;
                    children.push(self.parse_substitution()?);
                }
                let has_else = self.eat_kw(Keyword::Else);
                if has_else {
                    children.push(self.parse_substitution()?);
                }
                let end = self.expect_kw(Keyword::End)?;
                Ok(Node::new(Kind::Select { has_else }, children, start.merge(end)))
            }
            TokenKind::Kw(Keyword::Choice) => {
                self.advance();
                let mut children = vec![self.parse_substitution()?];
                while self.eat_kw(Keyword::OrElse) {
                    children.push(self.parse_substitution()?);
                }
                let end = self.expect_kw(Keyword::End)?;
                Ok(Node::new(Kind::Choice, children, start.merge(end)))
            }
            TokenKind::Kw(Keyword::Any) => {
                self.advance();
                let ids_start = self.span();
                let ids = self.ident_list()?;
                let ids = Node::new(Kind::List, ids, ids_start.merge(self.prev_span()));
                self.expect_kw(Keyword::Where)?;
                let pred = self.predicate()?;
                self.expect_kw(Keyword::Then)?;
                let body = self.parse_substitution()?;
                let end = self.expect_kw(Keyword::End)?;
                Ok(Node::new(Kind::Any, vec![ids, pred, body], start.merge(end)))
            }
            TokenKind::Ident(_) => self.assignment_like(start),
            _ => Err(self.error("substitution")),
        }
    }

    /// After `IF` or `ELSIF`.
    fn if_tail(&mut self, start: SourceSpan) -> ParseResult<Node> {
        let cond = self.predicate()?;
        self.expect_kw(Keyword::Then)?;
        let then = self.parse_substitution()?;
        let (otherwise, end) = if self.at_kw(Keyword::Elsif) {
            let elsif_start = self.advance().span;
            let nested = self.if_tail(elsif_start)?;
            let end = nested.span;
            (nested, end)
        } else {
            let otherwise = if self.eat_kw(Keyword::Else) {
                self.parse_substitution()?
            } else {
                Node::leaf(Kind::Skip, self.span())
            };
            let end = self.expect_kw(Keyword::End)?;
            (otherwise, end)
        };
        Ok(Node::new(Kind::If, vec![cond, then, otherwise], start.merge(end)))
    }

    fn assignment_like(&mut self, start: SourceSpan) -> ParseResult<Node> {
        let mut targets = vec![self.formula(TARGET_PREC)?];
        while self.eat_sym(Sym::Comma) {
            targets.push(self.formula(TARGET_PREC)?);
        }
        for t in &targets {
            let ok = match &t.kind {
                Kind::Identifier(_) => true,
                Kind::Apply => t.children[0].identifier_name().is_some(),
                _ => false,
            };
            if !ok {
                return Err(ParseError::new(t.span, "assignment target", "expression"));
            }
        }
        let targets_span = targets[0].span.merge(targets[targets.len() - 1].span);
        if self.eat_sym(Sym::Assign) {
            let values = self.formula_list()?;
            for v in &values {
                check_category(v, Category::Expression)?;
            }
            if values.len() != targets.len() {
                return Err(ParseError::new(
                    self.prev_span(),
                    format!("{} values", targets.len()),
                    format!("{} values", values.len()),
                ));
            }
            let values_span = values[0].span.merge(values[values.len() - 1].span);
            let span = start.merge(values_span);
            return Ok(Node::new(
                Kind::Assign,
                vec![
                    Node::new(Kind::List, targets, targets_span),
                    Node::new(Kind::List, values, values_span),
                ],
                span,
            ));
        }
        let all_idents = targets.iter().all(|t| t.identifier_name().is_some());
        if self.eat_sym(Sym::BecomesIn) {
            if !all_idents {
                return Err(ParseError::new(targets_span, "identifier", "expression"));
            }
            let set = self.formula(0)?;
            check_category(&set, Category::Expression)?;
            let span = start.merge(set.span);
            return Ok(Node::new(
                Kind::BecomesElementOf,
                vec![Node::new(Kind::List, targets, targets_span), set],
                span,
            ));
        }
        if self.at_sym(Sym::Colon) && *self.peek_at(1) == TokenKind::Sym(Sym::LParen) {
            if !all_idents {
                return Err(ParseError::new(targets_span, "identifier", "expression"));
            }
            self.advance();
            self.advance();
            let pred = self.predicate()?;
            let end = self.expect_sym(Sym::RParen)?;
            return Ok(Node::new(
                Kind::BecomesSuchThat,
                vec![Node::new(Kind::List, targets, targets_span), pred],
                start.merge(end),
            ));
        }
        // `name` or `name(args)`: a definition or operation call.
        if targets.len() == 1 {
            let target = targets.pop().expect("one target");
            match target.kind {
                Kind::Identifier(name) => return Ok(Node::new(Kind::Call(name), vec![], target.span)),
                Kind::Apply => {
                    let mut children = target.children;
                    let head = children.remove(0);
                    let name = head.identifier_name().expect("checked above").to_owned();
                    return Ok(Node::new(Kind::Call(name), children, target.span));
                }
                _ => {}
            }
        }
        Err(self.error("':=', '::' or ':('"))
    }

    // ---------------------------------------------------------------------
    // Machines

    pub fn parse_machine(&mut self) -> ParseResult<MachineAst> {
        self.expect_kw(Keyword::Machine)?;
        self.definition_calls = true;
        let name = self.expect_ident()?;
        let mut machine = MachineAst {
            name: name.identifier_name().unwrap_or_default().to_owned(),
            ..MachineAst::default()
        };
        loop {
            let tok = self.peek().clone();
            match tok {
                TokenKind::Kw(Keyword::End) => {
                    self.advance();
                    break;
                }
                TokenKind::Kw(Keyword::Sets) => {
                    self.advance();
                    loop {
                        machine.sets.push(self.set_declaration()?);
                        if !self.eat_sym(Sym::Semicolon) {
                            break;
                        }
                    }
                }
                TokenKind::Kw(Keyword::Constants) => {
                    self.advance();
                    machine.constants.extend(self.ident_list()?);
                }
                TokenKind::Kw(Keyword::Variables) => {
                    self.advance();
                    machine.variables.extend(self.ident_list()?);
                }
                TokenKind::Kw(Keyword::Properties) => {
                    self.advance();
                    machine.properties = Some(self.predicate()?);
                }
                TokenKind::Kw(Keyword::Invariant) => {
                    self.advance();
                    machine.invariant = Some(self.predicate()?);
                }
                TokenKind::Kw(Keyword::Assertions) => {
                    self.advance();
                    machine.assertions.push(self.predicate()?);
                    while self.eat_sym(Sym::Semicolon) {
                        machine.assertions.push(self.predicate()?);
                    }
                }
                TokenKind::Kw(Keyword::Definitions) => {
                    self.advance();
                    loop {
                        machine.definitions.push(self.definition()?);
                        if !self.eat_sym(Sym::Semicolon) {
                            break;
                        }
                        if matches!(self.peek(), TokenKind::Kw(k) if k.is_clause() || *k == Keyword::End) {
                            break;
                        }
                    }
                }
                TokenKind::Kw(Keyword::Initialisation) => {
                    self.advance();
                    machine.initialisation = Some(self.parse_substitution()?);
                }
                TokenKind::Kw(Keyword::Operations) => {
                    self.advance();
                    loop {
                        machine.operations.push(self.operation()?);
                        if !self.eat_sym(Sym::Semicolon) {
                            break;
                        }
                        if matches!(self.peek(), TokenKind::Kw(k) if k.is_clause() || *k == Keyword::End) {
                            break;
                        }
                    }
                }
                _ => return Err(self.error("machine clause or END")),
            }
        }
        self.expect_eof()?;
        validate_machine(&machine)?;
        Ok(machine)
    }

    fn check(&self, node: &Node, expected: Category) -> ParseResult<()> {
        check_category_with(node, expected, self.definition_calls)
    }

    fn set_declaration(&mut self) -> ParseResult<SetDeclaration> {
        let start = self.span();
        let name = self.expect_ident()?;
        let name = name.identifier_name().expect("identifier").to_owned();
        let elements = if self.eat_sym(Sym::Equal) {
            self.expect_sym(Sym::LBrace)?;
            let ids = self.ident_list()?;
            self.expect_sym(Sym::RBrace)?;
            Some(
                ids.iter()
                    .filter_map(|n| n.identifier_name().map(str::to_owned))
                    .collect(),
            )
        } else {
            None
        };
        Ok(SetDeclaration {
            name,
            elements,
            span: start.merge(self.prev_span()),
        })
    }

    fn definition(&mut self) -> ParseResult<Definition> {
        let start = self.span();
        let name = self.expect_ident()?;
        let name = name.identifier_name().expect("identifier").to_owned();
        let mut params = Vec::new();
        if self.eat_sym(Sym::LParen) {
            for p in self.ident_list()? {
                let pname = p.identifier_name().expect("identifier").to_owned();
                if params.contains(&pname) {
                    return Err(ParseError::new(p.span, "distinct parameter names", pname));
                }
                params.push(pname);
            }
            self.expect_sym(Sym::RParen)?;
        }
        self.expect_sym(Sym::DefEq)?;
        let body = self.definition_body()?;
        Ok(Definition {
            name,
            params,
            span: start.merge(body.span),
            body,
        })
    }

    fn at_declaration_end(&self) -> bool {
        match self.peek() {
            TokenKind::Sym(Sym::Semicolon) => self.semicolon_is_separator(),
            TokenKind::Kw(k) => k.is_clause() || *k == Keyword::End,
            TokenKind::Eof => true,
            _ => false,
        }
    }

    fn definition_body(&mut self) -> ParseResult<Node> {
        let saved = self.pos;
        if let Ok(node) = self.formula(0) {
            let pure = self.check(&node, Category::Predicate).is_ok()
                || self.check(&node, Category::Expression).is_ok();
            if pure && self.at_declaration_end() {
                return Ok(node);
            }
        }
        self.pos = saved;
        self.parse_substitution()
    }

    fn operation(&mut self) -> ParseResult<Operation> {
        let start = self.span();
        let name = self.expect_ident()?;
        let name = name.identifier_name().expect("identifier").to_owned();
        let params = if self.eat_sym(Sym::LParen) {
            let ids = self.ident_list()?;
            self.expect_sym(Sym::RParen)?;
            ids
        } else {
            Vec::new()
        };
        self.expect_sym(Sym::Equal)?;
        let body = self.parse_substitution()?;
        Ok(Operation {
            name,
            params,
            span: start.merge(body.span),
            body,
        })
    }
}

fn validate_machine(machine: &MachineAst) -> ParseResult<()> {
    let mut seen = std::collections::BTreeSet::new();
    for node in machine.constants.iter().chain(&machine.variables) {
        let name = node.identifier_name().unwrap_or_default();
        if !seen.insert(name.to_owned()) {
            return Err(ParseError::new(node.span, "unique identifier", format!("duplicate '{name}'")));
        }
    }
    if !machine.variables.is_empty() && machine.invariant.is_none() {
        return Err(ParseError::new(
            machine.variables[0].span,
            "INVARIANT clause for declared VARIABLES",
            "no INVARIANT",
        ));
    }
    Ok(())
}

/// Check that `node` belongs to `expected` and recursively that every child
/// has the category its parent demands.
/// Check that `node` and its children sit in syntactically valid positions.
pub fn check_category(node: &Node, expected: Category) -> ParseResult<()> {
    check_category_with(node, expected, false)
}

/// With `definition_calls`, an identifier or an application of one may stand
/// in predicate position; typing rejects it if it survives expansion.
fn check_category_with(node: &Node, expected: Category, definition_calls: bool) -> ParseResult<()> {
    let actual = node.category();
    let definition_call = definition_calls
        && expected == Category::Predicate
        && (matches!(node.kind, Kind::Identifier(_))
            || (node.kind == Kind::Apply && node.children[0].identifier_name().is_some()));
    if actual != expected && !definition_call {
        let name = |c: Category| match c {
            Category::Predicate => "predicate",
            Category::Expression => "expression",
            Category::Substitution => "substitution",
            Category::List => "identifier list",
        };
        return Err(ParseError::new(node.span, name(expected), name(actual)));
    }
    let len = node.children.len();
    for (i, child) in node.children.iter().enumerate() {
        let want = if node.kind == Kind::List {
            Category::Expression
        } else {
            node.kind.child_category(i, len)
        };
        check_category_with(child, want, definition_calls)?;
    }
    Ok(())
}

fn finish_unit(mut parser: Parser, kind: UnitKind) -> Result<ParseUnit, SyntaxError> {
    parser.skip_predicate_marker();
    let root = match kind {
        UnitKind::Substitution => parser.parse_substitution()?,
        _ => parser.parse_formula()?,
    };
    parser.expect_eof()?;
    let category = match kind {
        UnitKind::Predicate => Category::Predicate,
        UnitKind::Expression => Category::Expression,
        UnitKind::Substitution => Category::Substitution,
    };
    check_category(&root, category)?;
    Ok(ParseUnit { kind, root })
}

/// Parse a predicate. A leading `#PREDICATE` marker is accepted.
pub fn parse_predicate(source: &str) -> Result<ParseUnit, SyntaxError> {
    finish_unit(Parser::from_source(source)?, UnitKind::Predicate)
}

pub fn parse_expression(source: &str) -> Result<ParseUnit, SyntaxError> {
    finish_unit(Parser::from_source(source)?, UnitKind::Expression)
}

pub fn parse_substitution(source: &str) -> Result<ParseUnit, SyntaxError> {
    finish_unit(Parser::from_source(source)?, UnitKind::Substitution)
}

/// Parse either a predicate or an expression, whichever the text is.
pub fn parse_formula(source: &str) -> Result<ParseUnit, SyntaxError> {
    let mut parser = Parser::from_source(source)?;
    parser.skip_predicate_marker();
    let root = parser.parse_formula()?;
    parser.expect_eof()?;
    let kind = if root.category() == Category::Predicate {
        check_category(&root, Category::Predicate)?;
        UnitKind::Predicate
    } else {
        check_category(&root, Category::Expression)?;
        UnitKind::Expression
    };
    Ok(ParseUnit { kind, root })
}

pub fn parse_machine(source: &str) -> Result<MachineAst, SyntaxError> {
    let mut parser = Parser::from_source(source)?;
    Ok(parser.parse_machine()?)
}

/// Parse a comma separated list of expressions, e.g. operation arguments.
pub fn parse_expression_list(source: &str) -> Result<Vec<Node>, SyntaxError> {
    let mut parser = Parser::from_source(source)?;
    let items = parser.formula_list()?;
    parser.expect_eof()?;
    for item in &items {
        check_category(item, Category::Expression)?;
    }
    Ok(items)
}
