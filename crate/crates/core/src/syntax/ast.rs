//! Abstract syntax tree shared by every later phase.
//!
//! All constructs use one uniform [`Node`] shape: a [`Kind`] tag, an ordered
//! child list, a source span and (after typing) a resolved type. Child arity
//! is fixed per kind, see [`Kind::arity`].

use std::fmt;

use num_bigint::BigInt;

use crate::typing::BType;

/// Position range in the source text. Lines and columns are 1-based; the end
/// column points one past the last character.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct SourceSpan {
    pub start_line: u32,
    pub start_col: u32,
    pub end_line: u32,
    pub end_col: u32,
}

impl SourceSpan {
    pub fn new(start_line: u32, start_col: u32, end_line: u32, end_col: u32) -> Self {
        Self {
            start_line,
            start_col,
            end_line,
            end_col,
        }
    }

    /// Smallest span covering both `self` and `other`.
    pub fn merge(self, other: SourceSpan) -> SourceSpan {
        let (start_line, start_col) =
            (self.start_line, self.start_col).min((other.start_line, other.start_col));
        let (end_line, end_col) = (self.end_line, self.end_col).max((other.end_line, other.end_col));
        SourceSpan {
            start_line,
            start_col,
            end_line,
            end_col,
        }
    }

    pub fn contains(&self, other: &SourceSpan) -> bool {
        (self.start_line, self.start_col) <= (other.start_line, other.start_col)
            && (other.end_line, other.end_col) <= (self.end_line, self.end_col)
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.start_line, self.start_col)
    }
}

/// The seven function arrows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FunctionKind {
    /// `+->`
    Partial,
    /// `-->`
    Total,
    /// `>+>`
    PartialInjection,
    /// `>->`
    TotalInjection,
    /// `+->>`
    PartialSurjection,
    /// `-->>`
    TotalSurjection,
    /// `>->>`
    TotalBijection,
}

impl FunctionKind {
    pub const ALL: [FunctionKind; 7] = [
        FunctionKind::Partial,
        FunctionKind::Total,
        FunctionKind::PartialInjection,
        FunctionKind::TotalInjection,
        FunctionKind::PartialSurjection,
        FunctionKind::TotalSurjection,
        FunctionKind::TotalBijection,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            FunctionKind::Partial => "+->",
            FunctionKind::Total => "-->",
            FunctionKind::PartialInjection => ">+>",
            FunctionKind::TotalInjection => ">->",
            FunctionKind::PartialSurjection => "+->>",
            FunctionKind::TotalSurjection => "-->>",
            FunctionKind::TotalBijection => ">->>",
        }
    }

    pub fn is_total(self) -> bool {
        matches!(
            self,
            FunctionKind::Total
                | FunctionKind::TotalInjection
                | FunctionKind::TotalSurjection
                | FunctionKind::TotalBijection
        )
    }

    pub fn is_injective(self) -> bool {
        matches!(
            self,
            FunctionKind::PartialInjection | FunctionKind::TotalInjection | FunctionKind::TotalBijection
        )
    }

    pub fn is_surjective(self) -> bool {
        matches!(
            self,
            FunctionKind::PartialSurjection | FunctionKind::TotalSurjection | FunctionKind::TotalBijection
        )
    }
}

/// Built-in set constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BuiltinSet {
    Integer,
    Natural,
    Natural1,
    Nat,
    Nat1,
    Int,
    Bool,
    String,
}

impl BuiltinSet {
    pub fn keyword(self) -> &'static str {
        match self {
            BuiltinSet::Integer => "INTEGER",
            BuiltinSet::Natural => "NATURAL",
            BuiltinSet::Natural1 => "NATURAL1",
            BuiltinSet::Nat => "NAT",
            BuiltinSet::Nat1 => "NAT1",
            BuiltinSet::Int => "INT",
            BuiltinSet::Bool => "BOOL",
            BuiltinSet::String => "STRING",
        }
    }
}

/// Syntactic category of a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Predicate,
    Expression,
    Substitution,
    /// Identifier list of a binder or assignment target list.
    List,
}

/// Allowed number of children for a kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arity {
    Exactly(usize),
    AtLeast(usize),
}

impl Arity {
    pub fn accepts(self, n: usize) -> bool {
        match self {
            Arity::Exactly(k) => n == k,
            Arity::AtLeast(k) => n >= k,
        }
    }
}

/// Node tag. One variant per supported construct.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Kind {
    // Leaves.
    Integer(BigInt),
    String(String),
    True,
    False,
    Identifier(String),
    Builtin(BuiltinSet),
    MaxInt,
    MinInt,
    EmptySet,
    EmptySequence,

    // Arithmetic.
    Add,
    MinusOrSetSubtract,
    /// `*` before typing decides between multiplication and cartesian product.
    MultOrCart,
    Mult,
    Cartesian,
    Div,
    Mod,
    Power,
    UnaryMinus,
    Succ,
    Pred,

    // Sets.
    SetExtension,
    Interval,
    PowerSet,
    PowerSet1,
    FinSet,
    FinSet1,
    Union,
    Intersection,
    Card,
    Min,
    Max,
    Comprehension,
    Lambda,
    BoolOf,

    // Relations and functions.
    Pair,
    Relations,
    Functions(FunctionKind),
    Domain,
    Range,
    Inverse,
    Image,
    Composition,
    Override,
    DomainRestrict,
    RangeRestrict,
    DomainSubtract,
    RangeSubtract,
    Apply,

    // Sequences.
    SequenceExtension,
    Seq,
    Seq1,
    Size,
    Concat,
    First,
    Last,
    Front,
    Tail,

    // Predicates.
    And,
    Or,
    Implies,
    Equivalence,
    Not,
    Forall,
    Exists,
    Equal,
    NotEqual,
    Less,
    LessEqual,
    Greater,
    GreaterEqual,
    Member,
    NotMember,
    Subset,
    StrictSubset,
    NotSubset,
    NotStrictSubset,

    // Substitutions.
    Skip,
    Assign,
    BecomesElementOf,
    BecomesSuchThat,
    Block,
    Sequence,
    Parallel,
    Precondition,
    /// `IF c THEN a ELSE b END`; ELSIF chains nest in the else branch.
    If,
    /// Children are guard/body pairs followed by the ELSE body when present.
    Select { has_else: bool },
    Choice,
    Any,
    /// `name(args)` in substitution position before definition expansion.
    Call(String),

    /// Binder identifiers and assignment targets.
    List,
}

impl Kind {
    pub fn arity(&self) -> Arity {
        use Kind::*;
        match self {
            Integer(_) | String(_) | True | False | Identifier(_) | Builtin(_) | MaxInt | MinInt
            | EmptySet | EmptySequence | Skip => Arity::Exactly(0),
            UnaryMinus | Succ | Pred | PowerSet | PowerSet1 | FinSet | FinSet1 | Card | Min | Max
            | BoolOf | Domain | Range | Inverse | Seq | Seq1 | Size | First | Last | Front | Tail
            | Not | Block => Arity::Exactly(1),
            Add | MinusOrSetSubtract | MultOrCart | Mult | Cartesian | Div | Mod | Power
            | Interval | Union | Intersection | Comprehension | Pair | Relations | Functions(_)
            | Image | Composition | Override | DomainRestrict | RangeRestrict | DomainSubtract
            | RangeSubtract | Concat | And | Or | Implies | Equivalence | Forall | Exists | Equal
            | NotEqual | Less | LessEqual | Greater | GreaterEqual | Member | NotMember | Subset
            | StrictSubset | NotSubset | NotStrictSubset | Assign | BecomesElementOf
            | BecomesSuchThat | Sequence | Parallel | Precondition => Arity::Exactly(2),
            Lambda | If | Any => Arity::Exactly(3),
            SetExtension | SequenceExtension | List => Arity::AtLeast(1),
            Apply => Arity::AtLeast(2),
            Select { has_else: false } => Arity::AtLeast(2),
            Select { has_else: true } => Arity::AtLeast(3),
            Choice => Arity::AtLeast(1),
            Call(_) => Arity::AtLeast(0),
        }
    }

    pub fn category(&self) -> Category {
        use Kind::*;
        match self {
            And | Or | Implies | Equivalence | Not | Forall | Exists | Equal | NotEqual | Less
            | LessEqual | Greater | GreaterEqual | Member | NotMember | Subset | StrictSubset
            | NotSubset | NotStrictSubset => Category::Predicate,
            Skip | Assign | BecomesElementOf | BecomesSuchThat | Block | Sequence | Parallel
            | Precondition | If | Select { .. } | Choice | Any | Call(_) => Category::Substitution,
            List => Category::List,
            _ => Category::Expression,
        }
    }

    /// Category required of the child at `index` among `len` children.
    pub fn child_category(&self, index: usize, len: usize) -> Category {
        use Category::{Expression as E, List as L, Predicate as P, Substitution as S};
        use Kind::*;
        match self {
            And | Or | Implies | Equivalence | Not | BoolOf => P,
            Forall | Exists | Comprehension => {
                if index == 0 {
                    L
                } else {
                    P
                }
            }
            Lambda => match index {
                0 => L,
                1 => P,
                _ => E,
            },
            Assign => L,
            BecomesElementOf => {
                if index == 0 {
                    L
                } else {
                    E
                }
            }
            BecomesSuchThat => {
                if index == 0 {
                    L
                } else {
                    P
                }
            }
            Block | Sequence | Parallel | Choice => S,
            Precondition => {
                if index == 0 {
                    P
                } else {
                    S
                }
            }
            If => {
                if index == 0 {
                    P
                } else {
                    S
                }
            }
            Select { has_else } => {
                if *has_else && index == len - 1 {
                    S
                } else if index.is_multiple_of(2) {
                    P
                } else {
                    S
                }
            }
            Any => match index {
                0 => L,
                1 => P,
                _ => S,
            },
            _ => E,
        }
    }

    /// True for the binders that introduce identifiers through a leading `List` child.
    pub fn is_binder(&self) -> bool {
        matches!(
            self,
            Kind::Forall | Kind::Exists | Kind::Comprehension | Kind::Lambda | Kind::Any
        )
    }
}

/// A node of the syntax tree.
#[derive(Debug, Clone)]
pub struct Node {
    pub kind: Kind,
    pub children: Vec<Node>,
    pub span: SourceSpan,
    /// Resolved type; filled in by the type checker on identifier and expression nodes.
    pub ty: Option<BType>,
}

impl Node {
    pub fn new(kind: Kind, children: Vec<Node>, span: SourceSpan) -> Self {
        Self {
            kind,
            children,
            span,
            ty: None,
        }
    }

    pub fn leaf(kind: Kind, span: SourceSpan) -> Self {
        Self::new(kind, Vec::new(), span)
    }

    /// Build a node without position information.
    pub fn synthetic(kind: Kind, children: Vec<Node>) -> Self {
        Self::new(kind, children, SourceSpan::default())
    }

    pub fn ident(name: impl Into<String>) -> Self {
        Self::synthetic(Kind::Identifier(name.into()), Vec::new())
    }

    pub fn int(n: impl Into<BigInt>) -> Self {
        Self::synthetic(Kind::Integer(n.into()), Vec::new())
    }

    pub fn identifier_name(&self) -> Option<&str> {
        match &self.kind {
            Kind::Identifier(name) => Some(name),
            _ => None,
        }
    }

    pub fn category(&self) -> Category {
        self.kind.category()
    }

    /// Number of nodes in this subtree, including `self`.
    pub fn size(&self) -> usize {
        1 + self.children.iter().map(Node::size).sum::<usize>()
    }

    /// Pre-order traversal.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Node)) {
        f(self);
        for child in &self.children {
            child.walk(f);
        }
    }

    /// Structural equality ignoring spans and types.
    pub fn same_shape(&self, other: &Node) -> bool {
        self.kind == other.kind
            && self.children.len() == other.children.len()
            && self
                .children
                .iter()
                .zip(&other.children)
                .all(|(a, b)| a.same_shape(b))
    }

    /// Names bound by a binder node (its leading identifier list).
    pub fn bound_names(&self) -> Vec<&str> {
        if !self.kind.is_binder() {
            return Vec::new();
        }
        self.children[0]
            .children
            .iter()
            .filter_map(Node::identifier_name)
            .collect()
    }

    /// Top-level conjuncts of a predicate, flattening nested `&`.
    pub fn conjuncts(&self) -> Vec<&Node> {
        let mut out = Vec::new();
        fn go<'a>(node: &'a Node, out: &mut Vec<&'a Node>) {
            if node.kind == Kind::And {
                go(&node.children[0], out);
                go(&node.children[1], out);
            } else {
                out.push(node);
            }
        }
        go(self, &mut out);
        out
    }

    /// Identifiers occurring free in this subtree.
    pub fn free_identifiers(&self) -> std::collections::BTreeSet<String> {
        let mut out = std::collections::BTreeSet::new();
        let mut bound = Vec::new();
        collect_free(self, &mut bound, &mut out);
        out
    }
}

fn collect_free(
    node: &Node,
    bound: &mut Vec<String>,
    out: &mut std::collections::BTreeSet<String>,
) {
    match &node.kind {
        Kind::Identifier(name) => {
            if !bound.iter().any(|b| b == name) {
                out.insert(name.clone());
            }
        }
        kind if kind.is_binder() => {
            let names: Vec<String> = node.bound_names().into_iter().map(str::to_owned).collect();
            let depth = bound.len();
            bound.extend(names);
            for child in &node.children[1..] {
                collect_free(child, bound, out);
            }
            bound.truncate(depth);
        }
        Kind::Call(name) => {
            out.insert(name.clone());
            for child in &node.children {
                collect_free(child, bound, out);
            }
        }
        _ => {
            for child in &node.children {
                collect_free(child, bound, out);
            }
        }
    }
}

/// Which syntactic category a parse unit holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnitKind {
    Predicate,
    Expression,
    Substitution,
}

/// Result of parsing a single formula or substitution.
#[derive(Debug, Clone)]
pub struct ParseUnit {
    pub kind: UnitKind,
    pub root: Node,
}

/// A `DEFINITIONS` entry.
#[derive(Debug, Clone)]
pub struct Definition {
    pub name: String,
    pub params: Vec<String>,
    pub body: Node,
    pub span: SourceSpan,
}

/// A `SETS` entry: enumerated when `elements` is present, deferred otherwise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetDeclaration {
    pub name: String,
    pub elements: Option<Vec<String>>,
    pub span: SourceSpan,
}

impl SetDeclaration {
    pub fn is_enumerated(&self) -> bool {
        self.elements.is_some()
    }
}

/// One entry of the `OPERATIONS` clause.
#[derive(Debug, Clone)]
pub struct Operation {
    pub name: String,
    /// Parameter identifier nodes; typed after inference.
    pub params: Vec<Node>,
    pub body: Node,
    pub span: SourceSpan,
}

impl Operation {
    pub fn param_names(&self) -> Vec<&str> {
        self.params.iter().filter_map(Node::identifier_name).collect()
    }

    /// The precondition guarding the body, if the body is a `PRE`.
    pub fn precondition(&self) -> Option<&Node> {
        match self.body.kind {
            Kind::Precondition => Some(&self.body.children[0]),
            _ => None,
        }
    }
}

/// A parsed `MACHINE`.
#[derive(Debug, Clone, Default)]
pub struct MachineAst {
    pub name: String,
    pub sets: Vec<SetDeclaration>,
    /// Identifier nodes of the CONSTANTS clause; typed after inference.
    pub constants: Vec<Node>,
    pub properties: Option<Node>,
    pub variables: Vec<Node>,
    pub invariant: Option<Node>,
    pub assertions: Vec<Node>,
    pub definitions: Vec<Definition>,
    pub initialisation: Option<Node>,
    pub operations: Vec<Operation>,
}

impl MachineAst {
    pub fn constant_names(&self) -> Vec<&str> {
        self.constants.iter().filter_map(Node::identifier_name).collect()
    }

    pub fn variable_names(&self) -> Vec<&str> {
        self.variables.iter().filter_map(Node::identifier_name).collect()
    }

    pub fn operation(&self, name: &str) -> Option<&Operation> {
        self.operations.iter().find(|op| op.name == name)
    }

    pub fn is_constant(&self, name: &str) -> bool {
        self.constant_names().contains(&name)
    }

    pub fn is_variable(&self, name: &str) -> bool {
        self.variable_names().contains(&name)
    }
}
