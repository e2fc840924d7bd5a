//! Tokenizer for B source text.

use std::fmt;

use num_bigint::BigInt;
use thiserror::Error;

use super::ast::SourceSpan;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("LEX ERROR {span}: {message}")]
pub struct LexError {
    pub span: SourceSpan,
    pub message: String,
}

/// Reserved words.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Keyword {
    True,
    False,
    Not,
    Or,
    Mod,
    Integer,
    Natural,
    Natural1,
    Nat,
    Nat1,
    Int,
    BoolSet,
    StringSet,
    MaxInt,
    MinInt,
    Pow,
    Pow1,
    Fin,
    Fin1,
    Card,
    Min,
    Max,
    Dom,
    Ran,
    Size,
    First,
    Last,
    Front,
    Tail,
    Succ,
    Pred,
    Bool,
    Seq,
    Seq1,
    Skip,
    Begin,
    End,
    If,
    Then,
    Elsif,
    Else,
    Pre,
    Select,
    When,
    Choice,
    OrElse,
    Any,
    Where,
    Machine,
    Sets,
    Constants,
    Properties,
    Variables,
    Invariant,
    Assertions,
    Definitions,
    Initialisation,
    Operations,
}

const KEYWORDS: &[(&str, Keyword)] = &[
    ("TRUE", Keyword::True),
    ("FALSE", Keyword::False),
    ("not", Keyword::Not),
    ("or", Keyword::Or),
    ("mod", Keyword::Mod),
    ("INTEGER", Keyword::Integer),
    ("NATURAL", Keyword::Natural),
    ("NATURAL1", Keyword::Natural1),
    ("NAT", Keyword::Nat),
    ("NAT1", Keyword::Nat1),
    ("INT", Keyword::Int),
    ("BOOL", Keyword::BoolSet),
    ("STRING", Keyword::StringSet),
    ("MAXINT", Keyword::MaxInt),
    ("MININT", Keyword::MinInt),
    ("POW", Keyword::Pow),
    ("POW1", Keyword::Pow1),
    ("FIN", Keyword::Fin),
    ("FIN1", Keyword::Fin1),
    ("card", Keyword::Card),
    ("min", Keyword::Min),
    ("max", Keyword::Max),
    ("dom", Keyword::Dom),
    ("ran", Keyword::Ran),
    ("size", Keyword::Size),
    ("first", Keyword::First),
    ("last", Keyword::Last),
    ("front", Keyword::Front),
    ("tail", Keyword::Tail),
    ("succ", Keyword::Succ),
    ("pred", Keyword::Pred),
    ("bool", Keyword::Bool),
    ("seq", Keyword::Seq),
    ("seq1", Keyword::Seq1),
    ("skip", Keyword::Skip),
    ("BEGIN", Keyword::Begin),
    ("END", Keyword::End),
    ("IF", Keyword::If),
    ("THEN", Keyword::Then),
    ("ELSIF", Keyword::Elsif),
    ("ELSE", Keyword::Else),
    ("PRE", Keyword::Pre),
    ("SELECT", Keyword::Select),
    ("WHEN", Keyword::When),
    ("CHOICE", Keyword::Choice),
    ("OR", Keyword::OrElse),
    ("ANY", Keyword::Any),
    ("WHERE", Keyword::Where),
    ("MACHINE", Keyword::Machine),
    ("SETS", Keyword::Sets),
    ("CONSTANTS", Keyword::Constants),
    ("ABSTRACT_CONSTANTS", Keyword::Constants),
    ("CONCRETE_CONSTANTS", Keyword::Constants),
    ("PROPERTIES", Keyword::Properties),
    ("VARIABLES", Keyword::Variables),
    ("ABSTRACT_VARIABLES", Keyword::Variables),
    ("CONCRETE_VARIABLES", Keyword::Variables),
    ("INVARIANT", Keyword::Invariant),
    ("ASSERTIONS", Keyword::Assertions),
    ("DEFINITIONS", Keyword::Definitions),
    ("INITIALISATION", Keyword::Initialisation),
    ("INITIALIZATION", Keyword::Initialisation),
    ("OPERATIONS", Keyword::Operations),
];

impl Keyword {
    pub fn lookup(word: &str) -> Option<Keyword> {
        KEYWORDS.iter().find(|(w, _)| *w == word).map(|(_, k)| *k)
    }

    pub fn text(self) -> &'static str {
        KEYWORDS.iter().find(|(_, k)| *k == self).map(|(w, _)| *w).unwrap_or("?")
    }

    /// Keywords that open a machine clause.
    pub fn is_clause(self) -> bool {
        matches!(
            self,
            Keyword::Sets
                | Keyword::Constants
                | Keyword::Properties
                | Keyword::Variables
                | Keyword::Invariant
                | Keyword::Assertions
                | Keyword::Definitions
                | Keyword::Initialisation
                | Keyword::Operations
        )
    }
}

/// Operator and punctuation symbols, longest first so that scanning is
/// maximal munch.
const SYMBOLS: &[(&str, Sym)] = &[
    ("/<<:", Sym::NotStrictSubset),
    ("+->>", Sym::PartialSurj),
    ("-->>", Sym::TotalSurj),
    (">->>", Sym::TotalBij),
    ("<=>", Sym::Equiv),
    ("<<:", Sym::StrictSubset),
    ("/<:", Sym::NotSubset),
    ("<->", Sym::Relations),
    ("|->", Sym::Maps),
    ("<<|", Sym::DomSubtract),
    ("|>>", Sym::RanSubtract),
    ("+->", Sym::PartialFn),
    ("-->", Sym::TotalFn),
    (">+>", Sym::PartialInj),
    (">->", Sym::TotalInj),
    ("=>", Sym::Implies),
    ("==", Sym::DefEq),
    ("/=", Sym::NotEqual),
    ("<=", Sym::LessEqual),
    (">=", Sym::GreaterEqual),
    ("/:", Sym::NotMember),
    ("<:", Sym::Subset),
    ("**", Sym::Power),
    ("..", Sym::DotDot),
    ("\\/", Sym::Union),
    ("/\\", Sym::Inter),
    ("<+", Sym::Override),
    ("<|", Sym::DomRestrict),
    ("|>", Sym::RanRestrict),
    ("<>", Sym::EmptySeq),
    ("||", Sym::Parallel),
    (":=", Sym::Assign),
    ("::", Sym::BecomesIn),
    ("&", Sym::And),
    ("!", Sym::Forall),
    ("#", Sym::Exists),
    ("=", Sym::Equal),
    ("<", Sym::Less),
    (">", Sym::Greater),
    (":", Sym::Colon),
    ("+", Sym::Plus),
    ("-", Sym::Minus),
    ("*", Sym::Star),
    ("/", Sym::Slash),
    ("~", Sym::Tilde),
    ("[", Sym::LBracket),
    ("]", Sym::RBracket),
    ("(", Sym::LParen),
    (")", Sym::RParen),
    ("{", Sym::LBrace),
    ("}", Sym::RBrace),
    (",", Sym::Comma),
    (";", Sym::Semicolon),
    ("^", Sym::Caret),
    ("%", Sym::Percent),
    (".", Sym::Dot),
    ("|", Sym::Bar),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sym {
    NotStrictSubset,
    PartialSurj,
    TotalSurj,
    TotalBij,
    Equiv,
    StrictSubset,
    NotSubset,
    Relations,
    Maps,
    DomSubtract,
    RanSubtract,
    PartialFn,
    TotalFn,
    PartialInj,
    TotalInj,
    Implies,
    DefEq,
    NotEqual,
    LessEqual,
    GreaterEqual,
    NotMember,
    Subset,
    Power,
    DotDot,
    Union,
    Inter,
    Override,
    DomRestrict,
    RanRestrict,
    EmptySeq,
    Parallel,
    Assign,
    BecomesIn,
    And,
    Forall,
    Exists,
    Equal,
    Less,
    Greater,
    Colon,
    Plus,
    Minus,
    Star,
    Slash,
    Tilde,
    LBracket,
    RBracket,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Semicolon,
    Caret,
    Percent,
    Dot,
    Bar,
}

impl Sym {
    pub fn text(self) -> &'static str {
        SYMBOLS.iter().find(|(_, s)| *s == self).map(|(t, _)| *t).unwrap_or("?")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Int(BigInt),
    Str(String),
    Ident(String),
    Kw(Keyword),
    Sym(Sym),
    /// The `#PREDICATE` marker heading state files.
    PredicateMarker,
    Eof,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Int(n) => write!(f, "{n}"),
            TokenKind::Str(s) => write!(f, "\"{s}\""),
            TokenKind::Ident(s) => write!(f, "{s}"),
            TokenKind::Kw(k) => write!(f, "{}", k.text()),
            TokenKind::Sym(s) => write!(f, "{}", s.text()),
            TokenKind::PredicateMarker => write!(f, "#PREDICATE"),
            TokenKind::Eof => write!(f, "end of input"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: SourceSpan,
}

struct Cursor<'a> {
    chars: Vec<char>,
    pos: usize,
    line: u32,
    col: u32,
    _src: &'a str,
}

impl<'a> Cursor<'a> {
    fn peek(&self, ahead: usize) -> Option<char> {
        self.chars.get(self.pos + ahead).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.pos).copied()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn starts_with(&self, text: &str) -> bool {
        text.chars().enumerate().all(|(i, c)| self.peek(i) == Some(c))
    }
}

/// Split `source` into tokens. The returned vector always ends with `Eof`.
pub fn tokenize(source: &str) -> Result<Vec<Token>, LexError> {
    let mut cur = Cursor {
        chars: source.chars().collect(),
        pos: 0,
        line: 1,
        col: 1,
        _src: source,
    };
    let mut tokens = Vec::new();
    loop {
        // Whitespace and comments.
        loop {
            match cur.peek(0) {
                Some(c) if c.is_whitespace() => {
                    cur.bump();
                }
                Some('/') if cur.peek(1) == Some('*') => {
                    let (line, col) = (cur.line, cur.col);
                    cur.bump();
                    cur.bump();
                    loop {
                        if cur.starts_with("*/") {
                            cur.bump();
                            cur.bump();
                            break;
                        }
                        if cur.bump().is_none() {
                            return Err(LexError {
                                span: SourceSpan::new(line, col, cur.line, cur.col),
                                message: "unterminated comment".into(),
                            });
                        }
                    }
                }
                Some('/') if cur.peek(1) == Some('/') => {
                    while let Some(c) = cur.peek(0) {
                        if c == '\n' {
                            break;
                        }
                        cur.bump();
                    }
                }
                _ => break,
            }
        }
        let (line, col) = (cur.line, cur.col);
        let Some(c) = cur.peek(0) else {
            tokens.push(Token {
                kind: TokenKind::Eof,
                span: SourceSpan::new(line, col, line, col),
            });
            return Ok(tokens);
        };
        let kind = if c.is_ascii_digit() {
            let mut text = String::new();
            while let Some(d) = cur.peek(0).filter(char::is_ascii_digit) {
                text.push(d);
                cur.bump();
            }
            TokenKind::Int(text.parse().expect("digits parse as integer"))
        } else if c.is_alphabetic() {
            let mut text = String::new();
            while let Some(d) = cur.peek(0).filter(|d| d.is_alphanumeric() || *d == '_') {
                text.push(d);
                cur.bump();
            }
            match Keyword::lookup(&text) {
                Some(k) => TokenKind::Kw(k),
                None => TokenKind::Ident(text),
            }
        } else if c == '"' {
            cur.bump();
            let mut text = String::new();
            loop {
                match cur.bump() {
                    Some('"') => break,
                    Some('\n') | None => {
                        return Err(LexError {
                            span: SourceSpan::new(line, col, cur.line, cur.col),
                            message: "unterminated string literal".into(),
                        })
                    }
                    Some(ch) => text.push(ch),
                }
            }
            TokenKind::Str(text)
        } else if cur.starts_with("#PREDICATE") && !cur.peek(10).is_some_and(|d| d.is_alphanumeric() || d == '_') {
            for _ in 0..10 {
                cur.bump();
            }
            TokenKind::PredicateMarker
        } else if let Some((text, sym)) = SYMBOLS.iter().find(|(text, _)| cur.starts_with(text)) {
            for _ in 0..text.chars().count() {
                cur.bump();
            }
            TokenKind::Sym(*sym)
        } else {
            cur.bump();
            return Err(LexError {
                span: SourceSpan::new(line, col, cur.line, cur.col),
                message: format!("illegal character '{c}'"),
            });
        };
        tokens.push(Token {
            kind,
            span: SourceSpan::new(line, col, cur.line, cur.col),
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<TokenKind> {
        tokenize(src)
            .unwrap()
            .into_iter()
            .map(|t| t.kind)
            .filter(|k| *k != TokenKind::Eof)
            .collect()
    }

    #[test]
    fn simple_predicate() {
        assert_eq!(
            kinds("1+1=x"),
            vec![
                TokenKind::Int(1.into()),
                TokenKind::Sym(Sym::Plus),
                TokenKind::Int(1.into()),
                TokenKind::Sym(Sym::Equal),
                TokenKind::Ident("x".into()),
            ]
        );
    }

    #[test]
    fn comments_are_skipped() {
        assert_eq!(kinds("/* c */ TRUE"), vec![TokenKind::Kw(Keyword::True)]);
        assert_eq!(kinds("TRUE // trailing\n"), vec![TokenKind::Kw(Keyword::True)]);
    }

    #[test]
    fn state_file_line() {
        assert_eq!(
            kinds("CruiseAllowed = FALSE"),
            vec![
                TokenKind::Ident("CruiseAllowed".into()),
                TokenKind::Sym(Sym::Equal),
                TokenKind::Kw(Keyword::False),
            ]
        );
    }

    #[test]
    fn maximal_munch() {
        assert_eq!(
            kinds("f : A +->> B"),
            vec![
                TokenKind::Ident("f".into()),
                TokenKind::Sym(Sym::Colon),
                TokenKind::Ident("A".into()),
                TokenKind::Sym(Sym::PartialSurj),
                TokenKind::Ident("B".into()),
            ]
        );
        assert_eq!(
            kinds("x>-1"),
            vec![
                TokenKind::Ident("x".into()),
                TokenKind::Sym(Sym::Greater),
                TokenKind::Sym(Sym::Minus),
                TokenKind::Int(1.into()),
            ]
        );
        assert_eq!(kinds("1..3").len(), 3);
    }

    #[test]
    fn predicate_marker() {
        assert_eq!(
            kinds("/* Variables */\n#PREDICATE\n x = 1")[0],
            TokenKind::PredicateMarker
        );
    }

    #[test]
    fn spans_are_one_based() {
        let toks = tokenize("ab\n  cd").unwrap();
        assert_eq!(toks[0].span, SourceSpan::new(1, 1, 1, 3));
        assert_eq!(toks[1].span, SourceSpan::new(2, 3, 2, 5));
    }

    #[test]
    fn errors() {
        let err = tokenize("x = ?").unwrap_err();
        assert_eq!(err.span.start_col, 5);
        assert!(tokenize("/* open").is_err());
        assert!(tokenize("\"open").is_err());
    }
}
